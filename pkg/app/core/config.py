"""
Application configuration settings
"""
import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

BASE_DIR = Path(__file__).resolve().parent.parent.parent


def _flag(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip().lower() in ("1", "true", "yes", "on")


class Settings:
    APP_NAME: str = "Reuse42"
    APP_VERSION: str = "1.0.0"
    APP_DESCRIPTION: str = "Checker, flattener and interpreter for a trait calculus separating use from reuse"

    # Interpreter
    DEFAULT_FUEL: int = int(os.getenv("REUSE42_FUEL", "1000000"))
    PRELUDE_ENABLED: bool = _flag("REUSE42_PRELUDE", True)

    # Compilation
    STRICT_MODE: bool = _flag("REUSE42_STRICT", False)
    DEPENDENCY_MODES: list = ["demand", "maximal"]
    DEFAULT_DEPENDENCY_MODE: str = os.getenv("REUSE42_DEPENDENCY_MODE", "demand")

    # Files
    SOURCE_SUFFIX: str = ".l42mu"
    CORPUS_DIR: Path = Path(os.getenv("REUSE42_CORPUS_DIR", str(BASE_DIR / "corpus")))
    COUNTEREXAMPLE_DIR: Path = Path(os.getenv("REUSE42_COUNTEREXAMPLE_DIR", "counterexamples"))

    # Logging
    LOG_LEVEL: str = os.getenv("REUSE42_LOG_LEVEL", "WARNING")

    # Property harness: available checks and their default sample counts
    FUZZ_CHECKS: dict = {
        "a1": {"count": 1000, "description": "progress on well-typed flattened programs"},
        "a2": {"count": 10000, "description": "flattening never increases the wrong-literal count"},
        "algebra": {"count": 10000, "description": "commutativity, associativity and identity of sum"},
        "state": {"count": 10000, "description": "getter and wither laws on coherent factories"},
        "divergence": {"count": 1000, "description": "demand-driven versus maximal dependency sets"},
    }
    A1_EXPRESSIONS_PER_TABLE: int = 100


settings = Settings()
