"""
API routes for the property harness
"""
from fastapi import APIRouter, HTTPException

from app.core.config import settings
from app.models.schemas import FuzzRequest, Verdict
from app.services.harness_service import run_fuzz

router = APIRouter(prefix="/fuzz", tags=["Fuzz"])


@router.get("/")
def list_checks():
    """Available property checks and their default sample counts"""
    return {"checks": settings.FUZZ_CHECKS}


@router.post("/", response_model=Verdict)
def fuzz(request: FuzzRequest):
    """
    Run one property check on seeded random programs.

    Each failure is shrunk and returned inline as its message followed by the
    shrunk program; nothing is written to disk.
    """
    if request.check not in settings.FUZZ_CHECKS:
        raise HTTPException(
            status_code=400,
            detail=f"Invalid check. Choose from: {sorted(settings.FUZZ_CHECKS)}"
        )
    return run_fuzz(request.check, request.seed, request.count, None, request.config)
