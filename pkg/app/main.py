from contextlib import contextmanager
from typing import Iterator

from fastapi import FastAPI, HTTPException, status

from app.exceptions import KernelError
from app.parser import parse_problem
from app.schemas import (
    CheckModelRequest,
    CheckModelResponse,
    CorpusListResponse,
    CorpusRunRequest,
    CorpusRunResponse,
    ElimRequest,
    ElimResponse,
    ProveRequest,
    ProveResponse,
)
from app.utils.corpus_runner import load_manifest, run_corpus
from app.utils.reports import (
    check_model,
    choice_dumps,
    edge_dumps,
    eliminate,
    prove,
)

app = FastAPI(
    title='Epsilon Kernel API',
    description='Choice-term elimination, proof replay and finite model '
    'checking for free-variable calculi',
    version='0.1.0',
)


@contextmanager
def kernel_errors() -> Iterator[None]:
    try:
        yield
    except KernelError as exc:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=str(exc),
        ) from exc


@app.post('/elim')
async def elim(req: ElimRequest) -> ElimResponse:
    """
    Eliminate quantifiers or choice terms from the goals of a problem.
    """
    with kernel_errors():
        problem = parse_problem(req.problem)
        report = eliminate(
            problem, req.mode, req.order, req.share, req.parallel
        )

    return ElimResponse(
        success=True,
        formulas=report.texts,
        choices=choice_dumps(report.pair.cc),
        edges=edge_dumps(report.pair.vc.edges),
        depths=report.depths,
        nesting=report.nesting,
    )


@app.post('/prove')
async def prove_script(req: ProveRequest) -> ProveResponse:
    """
    Replay a proof script. A failing command is reported in the trace.
    """
    with kernel_errors():
        problem = parse_problem(req.problem)
        run = prove(problem, req.script)

    return ProveResponse(
        success=run.succeeded,
        trace=run.trace,
        closed=run.trace.closed,
        open=len(run.trace.open_goals),
    )


@app.post('/check-model')
async def check(req: CheckModelRequest) -> CheckModelResponse:
    """
    Check the goals of a problem on a structure or on all small structures.
    """
    if req.structure is None and not req.all_structures:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail='Give a structure or set all_structures',
        )

    with kernel_errors():
        problem = parse_problem(req.problem)
        reports = check_model(
            problem,
            req.structure,
            req.all_structures,
            req.max_size,
            req.variant,
            req.notion,
            req.edges,
            req.joint,
        )

    return CheckModelResponse(
        success=all(report.valid for report in reports), reports=reports
    )


@app.get('/corpus')
async def list_corpus() -> CorpusListResponse:
    """
    List the bundled corpus items.
    """
    with kernel_errors():
        items = load_manifest()

    return CorpusListResponse(success=True, items=items)


@app.post('/corpus/run')
async def run(req: CorpusRunRequest) -> CorpusRunResponse:
    """
    Run the bundled corpus, optionally only the items whose name contains
    ``only``.
    """
    with kernel_errors():
        results = run_corpus(req.only)

    passed = sum(1 for result in results if result.passed)
    return CorpusRunResponse(
        success=passed == len(results),
        passed=passed,
        failed=len(results) - passed,
        results=results,
    )
