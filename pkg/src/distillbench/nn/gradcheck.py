"""Central finite-difference oracle for backpropagation.

Intended for small networks (a few thousand parameters) where perturbing
every entry is affordable; the numeric side only ever calls predict(), so it
is independent of the backward-pass code it checks.
"""

import numpy as np

from .network import Network


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))


def grad_check(net: Network, batch: np.ndarray, loss_fn, step: float = 1e-5) -> float:
    """Compare analytic gradients against central differences, entrywise.

    ``loss_fn(logits) -> (loss, grad_wrt_logits)`` defines the scalar
    objective. Returns the worst relative error over all parameters.
    """
    logits = net.forward(batch)
    _, grad_logits = loss_fn(logits)
    analytic_grads, _ = net.backward(np.asarray(grad_logits, dtype=np.float64))

    worst = 0.0
    for p, g in zip(net.parameters(), analytic_grads):
        for i in range(p.size):
            orig = p.flat[i]
            p.flat[i] = orig + step
            loss_plus, _ = loss_fn(net.predict(batch))
            p.flat[i] = orig - step
            loss_minus, _ = loss_fn(net.predict(batch))
            p.flat[i] = orig
            numeric = (loss_plus - loss_minus) / (2.0 * step)
            worst = max(worst, relative_error(float(g.flat[i]), numeric))
    return worst
