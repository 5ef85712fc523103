from tunav.syntax.ast import (
    Assert,
    AssertBy,
    AxiomFn,
    BinOp,
    Binder,
    BoolLit,
    BroadcastGroup,
    BroadcastUse,
    Call,
    ConstDecl,
    Declaration,
    Exists,
    Expr,
    Forall,
    IntLit,
    LemmaCall,
    Let,
    Not,
    Param,
    ProgramAst,
    ProofFn,
    SortDecl,
    SourceSpan,
    SpecFn,
    Stmt,
    Type,
    UseStmt,
    Var,
)
from tunav.syntax.parser import parse_module
from tunav.syntax.render import render_module, render_without_sites

__all__ = [
    "Assert",
    "AssertBy",
    "AxiomFn",
    "BinOp",
    "Binder",
    "BoolLit",
    "BroadcastGroup",
    "BroadcastUse",
    "Call",
    "ConstDecl",
    "Declaration",
    "Exists",
    "Expr",
    "Forall",
    "IntLit",
    "LemmaCall",
    "Let",
    "Not",
    "Param",
    "ProgramAst",
    "ProofFn",
    "SortDecl",
    "SourceSpan",
    "SpecFn",
    "Stmt",
    "Type",
    "UseStmt",
    "Var",
    "parse_module",
    "render_module",
    "render_without_sites",
]
