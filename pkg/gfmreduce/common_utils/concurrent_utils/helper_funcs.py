# -*- coding: utf-8 -*-
'''Thread pool helpers for running independent trajectories and operating points.'''
import contextvars
import logging

from multiprocessing import cpu_count
from concurrent.futures import ThreadPoolExecutor, Future
from typing import Callable, Iterable, TypeVar, Any

_R = TypeVar('_R')
_T = TypeVar('_T')

_logger = logging.getLogger(__name__)

__background_threadpool__ = None

def get_threadpool()->ThreadPoolExecutor:
    '''Get the global thread pool for running background tasks'''
    global __background_threadpool__
    if __background_threadpool__ is None:
        __background_threadpool__ = ThreadPoolExecutor(max(cpu_count(), 1))
    return __background_threadpool__

def _log_failure(future: Future, name: str):
    err = future.exception()
    if err is not None:
        _logger.error(f'(run_in_background) `{name}` failed: {type(err).__name__}: {err}')

def run_in_background(func: Callable[..., _R], *args: Any, **kwargs: Any)->Future[_R]:
    '''
    Submit `func` to the global thread pool with a copy of the caller's context.
    Failures are logged; the returned future still raises them on `.result()`.
    '''
    context = contextvars.copy_context()
    future = get_threadpool().submit(context.run, func, *args, **kwargs)
    future.add_done_callback(lambda f: _log_failure(f, getattr(func, '__name__', repr(func))))
    return future

def map_in_background(func: Callable[[_T], _R], items: Iterable[_T], parallel: bool = True)->list[_R]:
    '''
    Apply `func` to every item, in the thread pool when `parallel` is set.
    Results keep the order of `items`; the first failure is re-raised.
    '''
    items = list(items)
    if not parallel or len(items) <= 1:
        return [func(item) for item in items]
    futures = [run_in_background(func, item) for item in items]
    return [f.result() for f in futures]


__all__ = ['get_threadpool', 'run_in_background', 'map_in_background']
