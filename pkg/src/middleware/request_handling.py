"""Request validation and error mapping for the HTTP API"""
import logging
from functools import wraps
from typing import Any, Callable, Dict, Tuple

from flask import jsonify, request

from utils.errors import PartitionSamplerError

logger = logging.getLogger(__name__)


def require_json_body(validator: Callable[[Dict[str, Any]], Tuple[bool, str]]):
    """
    Decorator to parse and validate the JSON request body

    On success, passes the parsed body to the wrapped function as `data`
    """
    def decorator(f):
        @wraps(f)
        def decorated_function(*args, **kwargs):
            data = request.get_json(silent=True)
            if data is None:
                return jsonify({
                    'error': 'Invalid request',
                    'message': 'A JSON object body is required'
                }), 400

            is_valid, error_message = validator(data)
            if not is_valid:
                logger.warning(f"{request.path}: validation failed - {error_message}")
                return jsonify({
                    'error': 'Invalid request',
                    'message': error_message
                }), 400

            return f(data=data, *args, **kwargs)
        return decorated_function
    return decorator


def map_sampler_errors(f):
    """
    Decorator translating library exceptions into JSON error responses

    Each PartitionSamplerError subclass carries its HTTP status.
    """
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except PartitionSamplerError as e:
            if e.http_status >= 500:
                logger.error(f"{request.path}: {type(e).__name__}", exc_info=True)
            else:
                logger.info(f"{request.path}: {type(e).__name__}: {e}")
            return jsonify({'error': type(e).__name__, 'message': str(e)}), e.http_status
        except Exception as e:
            logger.error(f"{request.path}: unexpected failure", exc_info=True)
            return jsonify({'error': 'Internal server error', 'message': str(e)}), 500
    return decorated_function
