"""Helpers shared by the test modules"""
from pathlib import Path

from app.services.compose_service import compile_program
from app.services.parser_service import parse_source

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def corpus_text(name: str) -> str:
    return (CORPUS / f"{name}.l42mu").read_text(encoding="utf-8")


def load_corpus(name: str, prelude: bool = True):
    return parse_source(corpus_text(name), f"{name}.l42mu", prelude)


def compile_corpus(name: str, **kwargs):
    return compile_program(load_corpus(name), **kwargs)


def compile_source(text: str, prelude: bool = True, **kwargs):
    return compile_program(parse_source(text, "<test>", prelude), **kwargs)
