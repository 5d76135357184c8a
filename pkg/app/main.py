"""
Reuse42 - checker, flattener and interpreter for a trait calculus
"""
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from contextlib import asynccontextmanager

from app.api import corpus, fuzz, programs
from app.core.config import settings
from app.core.logging import get_logger
from app.services.pipeline_service import corpus_files

logger = get_logger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Report the corpus on startup"""
    files = corpus_files()
    if files:
        logger.info("serving %d corpus programs from %s", len(files), settings.CORPUS_DIR)
    else:
        logger.warning("no corpus programs found in %s", settings.CORPUS_DIR)
    yield
    logger.info("shutting down %s", settings.APP_NAME)


# Create FastAPI app
app = FastAPI(
    title=settings.APP_NAME,
    version=settings.APP_VERSION,
    description=settings.APP_DESCRIPTION,
    docs_url="/docs",
    redoc_url="/redoc",
    lifespan=lifespan
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(programs.router, prefix="/api")
app.include_router(corpus.router, prefix="/api")
app.include_router(fuzz.router, prefix="/api")


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    return {
        "status": "healthy",
        "app": settings.APP_NAME,
        "version": settings.APP_VERSION
    }


@app.get("/api")
async def api_info():
    """API information"""
    return {
        "name": settings.APP_NAME,
        "version": settings.APP_VERSION,
        "description": settings.APP_DESCRIPTION,
        "endpoints": {
            "check": "/api/programs/check",
            "flatten": "/api/programs/flatten",
            "run": "/api/programs/run",
            "corpus": "/api/corpus",
            "corpus_program": "/api/corpus/{name}",
            "fuzz": "/api/fuzz",
        },
        "dependency_modes": settings.DEPENDENCY_MODES,
        "fuzz_checks": sorted(settings.FUZZ_CHECKS),
    }
