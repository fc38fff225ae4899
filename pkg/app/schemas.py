from typing import Annotated, List, Literal, Optional

from pydantic import BaseModel, Field, ValidationInfo, field_validator

from app.constants import MAX_SIZE, MAX_UNIVERSE, Notion, Variant


def validate_extension(v: Optional[str], extension: str) -> Optional[str]:
    """Shared validator for corpus file names."""
    if v is not None and not v.endswith(extension):
        raise ValueError(f'Expected a {extension} file, got {v}')
    return v


def validate_edge(v: str) -> str:
    """Shared validator for ``a -> b`` edge text."""
    parts = [p.strip() for p in v.split('->')]
    if len(parts) != 2 or not all(parts):  # noqa: PLR2004
        raise ValueError(f'Invalid edge {v!r}; expected "a -> b"')
    return v


Size = Annotated[int, Field(gt=0, le=MAX_UNIVERSE)]

ElimMode = Literal['classical', 'choice', 'vc']

Expectation = Literal['closed', 'open', 'rejected', 'valid', 'invalid',
                      'q_valid']


class EdgeDump(BaseModel):
    source: str
    target: str


class ChoiceEntryDump(BaseModel):
    variable: str
    abstraction: str


class StepDump(BaseModel):
    index: int
    line: Optional[int]
    rule: str
    goal: Optional[int]
    pos: Optional[int]
    payload: str
    text: str
    new_goals: List[int]
    edges: List[EdgeDump]
    choices: List[str]
    obligations: List[str]
    closing: Optional[List[str]]
    goals: List[str]


class TraceDump(BaseModel):
    problem: str
    steps: List[StepDump]
    open_goals: List[str]
    edges: List[EdgeDump]
    choices: List[ChoiceEntryDump]
    closed: int
    proved: bool
    error: Optional[str] = None


class VerdictReport(BaseModel):
    goal: str
    structure: str
    variant: Variant
    notion: Notion
    valid: bool
    checked: int
    failures: List[str]


class CorpusItem(BaseModel):
    name: str
    problem: str
    script: Optional[str] = None
    structure: Optional[str] = None
    all_structures: bool = False
    max_size: Size = MAX_SIZE
    edges: List[str] = []
    variant: Variant = 'some'
    notion: Notion = 'cr'
    joint: bool = False
    expect: Expectation
    open_goals: List[str] = []
    message: Optional[str] = None

    @field_validator('problem')
    @classmethod
    def validate_problem_file(cls, v: str) -> str:
        return validate_extension(v, '.p')  # type: ignore[return-value]

    @field_validator('script')
    @classmethod
    def validate_script_file(cls, v: Optional[str]) -> Optional[str]:
        return validate_extension(v, '.ps')

    @field_validator('structure')
    @classmethod
    def validate_structure_file(cls, v: Optional[str]) -> Optional[str]:
        return validate_extension(v, '.st')

    @field_validator('edges')
    @classmethod
    def validate_edges(cls, v: List[str]) -> List[str]:
        return [validate_edge(edge) for edge in v]

    @field_validator('message')
    @classmethod
    def validate_message(
        cls, v: Optional[str], info: ValidationInfo
    ) -> Optional[str]:
        if info.data.get('expect') == 'rejected' and not v:
            raise ValueError('A rejected item needs a message fragment')
        return v


class CorpusResult(BaseModel):
    name: str
    expect: Expectation
    passed: bool
    detail: str


class APIResponse(BaseModel):
    success: bool


class ElimRequest(BaseModel):
    problem: str
    mode: ElimMode = 'classical'
    order: Literal['inside_out', 'outside_in'] = 'inside_out'
    share: bool = True
    parallel: bool = False


class ElimResponse(APIResponse):
    formulas: List[str]
    choices: List[ChoiceEntryDump]
    edges: List[EdgeDump]
    depths: List[int]
    nesting: List[int]


class ProveRequest(BaseModel):
    problem: str
    script: str


class ProveResponse(APIResponse):
    trace: TraceDump
    closed: int
    open: int


class CheckModelRequest(BaseModel):
    problem: str
    structure: Optional[str] = None
    all_structures: bool = False
    max_size: Size = MAX_SIZE
    variant: Variant = 'some'
    notion: Notion = 'cr'
    edges: List[str] = []
    joint: bool = False

    @field_validator('edges')
    @classmethod
    def validate_edges(cls, v: List[str]) -> List[str]:
        return [validate_edge(edge) for edge in v]


class CheckModelResponse(APIResponse):
    reports: List[VerdictReport]


class CorpusListResponse(APIResponse):
    items: List[CorpusItem]


class CorpusRunRequest(BaseModel):
    only: Optional[str] = None


class CorpusRunResponse(APIResponse):
    passed: int
    failed: int
    results: List[CorpusResult]
