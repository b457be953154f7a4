import logging

from typing import TYPE_CHECKING

if not TYPE_CHECKING:
    logging.addLevelName(5, "VERBOSE")
    logging.addLevelName(100, "SUCCESS")
logging.VERBOSE = 5     # type: ignore
logging.SUCCESS = 100   # type: ignore

from logging import Logger as _Logger

class Logger(_Logger):
    def verbose(self, msg, *args, **kwargs):
        if self.isEnabledFor(5):
            self._log(5, msg, args, **kwargs)

    def success(self, msg, *args, **kwargs):
        if self.isEnabledFor(100):
            self._log(100, msg, args, **kwargs)

logging.setLoggerClass(Logger)

def get_logger(name: str) -> Logger:
    logger = logging.getLogger(name)
    if not isinstance(logger, Logger):
        logger.__class__ = Logger
    return logger   # type: ignore

_LOG_FORMAT = '%(asctime)s %(levelname)-8s %(name)s: %(message)s'

def setup_logging(level: str|int|None = None) -> Logger:
    '''
    Attach a single stream handler to the package root logger.
    Calling it again only changes the level. Library code never calls this,
    only entry points do.
    '''
    if level is None:
        from .constants import GFMREDUCE_LOG_LEVEL
        level = GFMREDUCE_LOG_LEVEL
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO
    root = get_logger('gfmreduce')
    if not any(getattr(h, '_gfmreduce_handler', False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_LOG_FORMAT))
        handler._gfmreduce_handler = True    # type: ignore
        root.addHandler(handler)
    root.setLevel(level)
    return root


__all__ = ['Logger', 'get_logger', 'setup_logging']
