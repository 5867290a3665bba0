import json
import logging

from stark.acshift.config import RunConfig, TimeUnits
from stark.acshift.core import classify_regime, decoherence_curve
from stark.acshift.errors import ConfigError, DephasingError

logger = logging.getLogger(__name__)

# keys a request body may carry; everything else in RunConfig is CLI-only
CURVE_KEYS = ['q', 'r', 'gamma_s', 'omega_rabi', 'detuning', 'omega0', 'lambda_lw',
              'tau_min', 'tau_max', 'n_points', 'spacing', 'times', 'rescale', 'transient']


class POST:
    def __init__(self):
        pass

    def generate_curve(self, event):
        if isinstance(event, str):
            event = json.loads(event)

        body = event.get('body', {})

        if not body:
            return {
                'statusCode': 400,
                'body': 'No body found'
            }

        if isinstance(body, str):
            try:
                body = json.loads(body)
            except json.JSONDecodeError:
                return {
                    'statusCode': 400,
                    'body': 'Invalid JSON'
                }

        if not isinstance(body, dict):
            return {
                'statusCode': 400,
                'body': 'body is not an object'
            }

        unknown = sorted(set(body) - set(CURVE_KEYS))
        if unknown:
            return {
                'statusCode': 400,
                'body': f'Unknown keys: {", ".join(unknown)}'
            }

        # numbers arrive as JSON numbers; the parsers expect text
        flags = {key: value if isinstance(value, str) else
                 ','.join(str(v) for v in value) if isinstance(value, list) else str(value)
                 for key, value in body.items()}

        try:
            config = RunConfig.from_sources(flags, env={})
            d = config.dimensionless()
            physical = config.physical()
            units = config.rescale
            params = physical if units is TimeUnits.SECONDS else d
            if params is None:
                raise ConfigError("rescale 'seconds' needs the physical parameters")
            curve = decoherence_curve(config.grid(), params, config.transient, units)
        except DephasingError as exc:
            return {
                'statusCode': 400,
                'body': str(exc)
            }
        except Exception:
            logger.exception("curve request failed")
            return {
                'statusCode': 500,
                'body': 'Unable to evaluate the curve'
            }

        return {
            'statusCode': 200,
            'body': json.dumps({
                'time_units': units.value,
                'transient': config.transient.value,
                'regime': classify_regime(d).label.value,
                'q': d.q,
                'r': d.r,
                'times': curve.times.tolist(),
                'gamma': curve.gamma.tolist(),
                'coherence': curve.coherence.tolist(),
            })
        }
