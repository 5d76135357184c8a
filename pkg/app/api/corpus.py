"""
API routes for the bundled example programs
"""
from fastapi import APIRouter, HTTPException

from app.models.diagnostics import Reuse42Error
from app.models.schemas import CorpusEntry
from app.services import pipeline_service

router = APIRouter(prefix="/corpus", tags=["Corpus"])


def _entry(path) -> CorpusEntry:
    source = path.read_text(encoding="utf-8")
    try:
        names = pipeline_service.load([(source, path.name)], pipeline_service.PipelineOptions()).names
    except Reuse42Error:
        # negative examples may not even parse; they are still listed
        names = []
    return CorpusEntry(name=path.stem, file_name=path.name, declarations=names)


@router.get("/")
def list_corpus():
    """List the bundled programs"""
    entries = [_entry(p) for p in pipeline_service.corpus_files()]
    return {
        "total": len(entries),
        "programs": entries,
    }


@router.get("/{name}")
def get_corpus_program(name: str):
    """Get the source of one bundled program"""
    path = pipeline_service.find_corpus_file(name)
    if path is None:
        raise HTTPException(
            status_code=404,
            detail=f"Program '{name}' not found"
        )
    return {
        "name": name,
        "file_name": path.name,
        "source": path.read_text(encoding="utf-8"),
    }
