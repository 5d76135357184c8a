"""
API routes for checking, flattening and running submitted programs
"""
from fastapi import APIRouter, HTTPException

from app.core.config import settings
from app.models.diagnostics import Reuse42Error
from app.models.schemas import (
    CheckResponse,
    DiagnosticOut,
    FlattenRequest,
    FlattenResponse,
    ProgramRequest,
    RunRequest,
    RunResponse,
)
from app.services import pipeline_service
from app.services.pipeline_service import PipelineOptions

router = APIRouter(prefix="/programs", tags=["Programs"])


def _options(request: ProgramRequest, fuel=None) -> PipelineOptions:
    if request.dependency_mode not in settings.DEPENDENCY_MODES:
        raise HTTPException(
            status_code=400,
            detail=f"Invalid dependency_mode. Choose from: {settings.DEPENDENCY_MODES}"
        )
    return PipelineOptions(
        strict=request.strict,
        prelude=request.prelude,
        dependency_mode=request.dependency_mode,
        fuel=fuel,
    )


def _failed(error: Reuse42Error) -> dict:
    return {"ok": False, "diagnostics": [DiagnosticOut.from_diagnostic(error.diagnostic)]}


@router.post("/check", response_model=CheckResponse)
def check_program(request: ProgramRequest):
    """
    Parse, flatten and type-check a program.

    Program errors are reported as diagnostics with `ok` false, not as HTTP errors.
    """
    options = _options(request)
    try:
        result = pipeline_service.check([(request.source, request.file_name)], options)
    except Reuse42Error as e:
        return CheckResponse(**_failed(e))
    return CheckResponse(ok=True, declarations=result.table.names)


@router.post("/flatten", response_model=FlattenResponse)
def flatten_program(request: FlattenRequest):
    """Return the canonical flattened program, optionally with composition steps"""
    options = _options(request)
    try:
        result = pipeline_service.check([(request.source, request.file_name)], options)
    except Reuse42Error as e:
        return FlattenResponse(**_failed(e))
    return FlattenResponse(
        ok=True,
        declarations=result.table.names,
        program=pipeline_service.flatten_text(result),
        trace=result.trace_lines() if request.trace else [],
    )


@router.post("/run", response_model=RunResponse)
def run_program(request: RunRequest):
    """Evaluate a closed expression against the flattened program"""
    options = _options(request, fuel=request.fuel)
    try:
        result = pipeline_service.check([(request.source, request.file_name)], options)
        outcome, value = pipeline_service.run_expression(
            result, request.expression, options, request.scope, trace=request.steps
        )
    except Reuse42Error as e:
        return RunResponse(**_failed(e))
    return RunResponse(
        ok=True,
        declarations=result.table.names,
        value=value,
        steps=outcome.steps,
        trace=outcome.trace,
    )
