import logging
import sys

logger = logging.getLogger('epsk')
logger.setLevel(logging.INFO)

if not logger.handlers:
    handler = logging.StreamHandler(sys.stderr)
    formatter = logging.Formatter(
        '[%(asctime)s] %(levelname)s in %(module)s: %(message)s'
    )
    handler.setFormatter(formatter)
    logger.addHandler(handler)


def set_quiet(quiet: bool) -> None:
    logger.setLevel(logging.WARNING if quiet else logging.INFO)
