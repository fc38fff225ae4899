from typing import List, Optional, Sequence


class KernelError(ValueError):
    """Base class of every error the kernel reports to its callers."""


class ParseError(KernelError):
    def __init__(
        self, message: str, line: Optional[int] = None,
        column: Optional[int] = None,
    ) -> None:
        self.line = line
        self.column = column
        where = ''
        if line is not None:
            where = f' at line {line}'
            if column is not None:
                where += f', column {column}'
        super().__init__(f'{message}{where}')


class TypeCheckError(KernelError):
    pass


class BindingError(KernelError):
    pass


class SubstitutionError(KernelError):
    pass


class ConditionError(KernelError):
    """A variable-condition or choice-condition check failed."""

    def __init__(
        self,
        violations: Sequence[str],
        cycle: Optional[Sequence[str]] = None,
    ) -> None:
        self.violations: List[str] = list(violations)
        self.cycle: Optional[List[str]] = (
            list(cycle) if cycle is not None else None
        )
        message = '; '.join(self.violations)
        if self.cycle:
            message += ' (cycle: ' + ' -> '.join(self.cycle) + ')'
        super().__init__(message)


class RuleError(KernelError):
    pass


class ScriptError(KernelError):
    def __init__(
        self, message: str, line: int, state: object = None
    ) -> None:
        self.line = line
        self.state = state
        super().__init__(f'script line {line}: {message}')


class OracleError(KernelError):
    pass


class CapExceededError(OracleError):
    def __init__(self, cap: str, bound: int, actual: int) -> None:
        self.cap = cap
        self.bound = bound
        self.actual = actual
        super().__init__(
            f'{cap} exceeded: {actual} > {bound}; raise the cap '
            f'explicitly to run this check'
        )
