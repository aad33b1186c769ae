"""Recurrent sequence classifiers trained by backpropagation through time.

Cells follow the standard recursions.  LSTM: input/forget/output gates plus
a tanh block input feeding the cell state.  GRU: update and reset gates, no
output gate.  The bidirectional variant runs two independent LSTMs, one over
the sequence and one over its reversal, and classifies from the
concatenation of their final hidden states.  The classifier head is an
affine map to class logits with softmax cross-entropy loss, minimized by
Adam over exactly the requested number of epochs with seeded shuffling.

Everything is double precision so analytic gradients can be validated
against central finite differences.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError
from ..seeding import make_rng

RNN_KINDS = ("lstm", "bilstm", "gru")

SEQ_STEPS = 32
SEQ_FEATURES = 4


def sequences_from_features(features: np.ndarray) -> np.ndarray:
    """Reshape (N, 128) detector-major feature vectors to (N, 32, 4).

    Time steps run over the 32 subcarrier bins; the per-step features are
    the four captured photodetectors.
    """
    features = np.asarray(features, dtype=float)
    n, width = features.shape
    if width != SEQ_STEPS * SEQ_FEATURES:
        raise ContractError(f"expected {SEQ_STEPS * SEQ_FEATURES} features")
    return features.reshape(n, SEQ_FEATURES, SEQ_STEPS).transpose(0, 2, 1)


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


# ---------------------------------------------------------------------------
# Cells


def _lstm_init(rng, n_in, n_hidden, suffix=""):
    rx = 1.0 / np.sqrt(n_in)
    rh = 1.0 / np.sqrt(n_hidden)
    b = np.zeros(4 * n_hidden)
    b[n_hidden:2 * n_hidden] = 1.0        # forget gate bias
    return {
        "Wx" + suffix: rng.uniform(-rx, rx, (n_in, 4 * n_hidden)),
        "Wh" + suffix: rng.uniform(-rh, rh, (n_hidden, 4 * n_hidden)),
        "b" + suffix: b,
    }


def _lstm_forward(params, x, suffix=""):
    """Run an LSTM over x (N, T, D); returns final hidden state and cache."""
    wx, wh, b = params["Wx" + suffix], params["Wh" + suffix], params["b" + suffix]
    n, t_steps, _ = x.shape
    nh = wh.shape[0]
    h = np.zeros((n, nh))
    c = np.zeros((n, nh))
    steps = []
    pre_x = x @ wx + b
    for t in range(t_steps):
        z = pre_x[:, t, :] + h @ wh
        i = _sigmoid(z[:, :nh])
        f = _sigmoid(z[:, nh:2 * nh])
        g = np.tanh(z[:, 2 * nh:3 * nh])
        o = _sigmoid(z[:, 3 * nh:])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        steps.append((h, c, i, f, g, o, c_new, tc))
        h = o * tc
        c = c_new
    return h, (x, steps, nh)


def _lstm_backward(params, cache, d_h, suffix=""):
    """Backprop d(final h) through the LSTM; returns parameter gradients."""
    x, steps, nh = cache
    wx, wh = params["Wx" + suffix], params["Wh" + suffix]
    d_wx = np.zeros_like(wx)
    d_wh = np.zeros_like(wh)
    d_b = np.zeros(4 * nh)
    d_c = np.zeros_like(d_h)
    dh = d_h
    for t in range(len(steps) - 1, -1, -1):
        h_prev, c_prev, i, f, g, o, c_new, tc = steps[t]
        do = dh * tc
        dc = d_c + dh * o * (1.0 - tc * tc)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        d_c = dc * f
        dz = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g * g),
            do * o * (1.0 - o),
        ], axis=1)
        d_wx += x[:, t, :].T @ dz
        d_wh += h_prev.T @ dz
        d_b += dz.sum(axis=0)
        dh = dz @ wh.T
    return {"Wx" + suffix: d_wx, "Wh" + suffix: d_wh, "b" + suffix: d_b}


def _gru_init(rng, n_in, n_hidden):
    rx = 1.0 / np.sqrt(n_in)
    rh = 1.0 / np.sqrt(n_hidden)
    return {
        "Wx": rng.uniform(-rx, rx, (n_in, 3 * n_hidden)),
        "Wh": rng.uniform(-rh, rh, (n_hidden, 3 * n_hidden)),
        "b": np.zeros(3 * n_hidden),
    }


def _gru_forward(params, x):
    wx, wh, b = params["Wx"], params["Wh"], params["b"]
    n, t_steps, _ = x.shape
    nh = wh.shape[0]
    h = np.zeros((n, nh))
    steps = []
    pre_x = x @ wx + b
    wh_zr = wh[:, :2 * nh]
    wh_h = wh[:, 2 * nh:]
    for t in range(t_steps):
        zr = _sigmoid(pre_x[:, t, :2 * nh] + h @ wh_zr)
        z = zr[:, :nh]
        r = zr[:, nh:]
        rh_prev = r * h
        hh = np.tanh(pre_x[:, t, 2 * nh:] + rh_prev @ wh_h)
        steps.append((h, z, r, rh_prev, hh))
        h = z * h + (1.0 - z) * hh
    return h, (x, steps, nh)


def _gru_backward(params, cache, d_h):
    x, steps, nh = cache
    wx, wh = params["Wx"], params["Wh"]
    wh_zr = wh[:, :2 * nh]
    wh_h = wh[:, 2 * nh:]
    d_wx = np.zeros_like(wx)
    d_wh = np.zeros_like(wh)
    d_b = np.zeros(3 * nh)
    dh = d_h
    for t in range(len(steps) - 1, -1, -1):
        h_prev, z, r, rh_prev, hh = steps[t]
        dz_gate = dh * (h_prev - hh)
        dhh = dh * (1.0 - z)
        dh_prev = dh * z
        dah = dhh * (1.0 - hh * hh)
        drh = dah @ wh_h.T
        dr = drh * h_prev
        dh_prev = dh_prev + drh * r
        daz = dz_gate * z * (1.0 - z)
        dar = dr * r * (1.0 - r)
        dzr = np.concatenate([daz, dar], axis=1)
        dpre = np.concatenate([dzr, dah], axis=1)
        d_wx += x[:, t, :].T @ dpre
        d_b += dpre.sum(axis=0)
        d_wh[:, :2 * nh] += h_prev.T @ dzr
        d_wh[:, 2 * nh:] += rh_prev.T @ dah
        dh = dh_prev + dzr @ wh_zr.T
    return {"Wx": d_wx, "Wh": d_wh, "b": d_b}


# ---------------------------------------------------------------------------
# Models


@dataclass
class RnnModel:
    kind: str
    n_hidden: int
    params: dict
    classes: np.ndarray
    feat_mean: np.ndarray = None
    feat_std: np.ndarray = None
    loss_trace: list = field(default_factory=list)


def init_rnn(kind: str, n_hidden: int, n_classes: int, seed: int,
             n_in: int = SEQ_FEATURES) -> RnnModel:
    """Fresh model with seeded uniform initialization."""
    if kind not in RNN_KINDS:
        raise ContractError(f"unknown RNN kind {kind!r}")
    if n_hidden < 1:
        raise ContractError("n_hidden must be >= 1")
    rng = make_rng(seed, 17)
    if kind == "lstm":
        params = _lstm_init(rng, n_in, n_hidden)
        head_in = n_hidden
    elif kind == "gru":
        params = _gru_init(rng, n_in, n_hidden)
        head_in = n_hidden
    else:
        params = _lstm_init(rng, n_in, n_hidden, suffix="_f")
        params.update(_lstm_init(rng, n_in, n_hidden, suffix="_b"))
        head_in = 2 * n_hidden
    ry = 1.0 / np.sqrt(head_in)
    params["Wy"] = rng.uniform(-ry, ry, (head_in, n_classes))
    params["by"] = np.zeros(n_classes)
    return RnnModel(kind=kind, n_hidden=n_hidden, params=params,
                    classes=np.arange(n_classes))


def _features_forward(model, x):
    """Sequence -> classifier-head input; returns (feat, caches)."""
    if model.kind == "lstm":
        h, cache = _lstm_forward(model.params, x)
        return h, cache
    if model.kind == "gru":
        h, cache = _gru_forward(model.params, x)
        return h, cache
    h_f, cache_f = _lstm_forward(model.params, x, suffix="_f")
    h_b, cache_b = _lstm_forward(model.params, x[:, ::-1, :], suffix="_b")
    return np.concatenate([h_f, h_b], axis=1), (cache_f, cache_b)


def _features_backward(model, caches, d_feat):
    if model.kind == "lstm":
        return _lstm_backward(model.params, caches, d_feat)
    if model.kind == "gru":
        return _gru_backward(model.params, caches, d_feat)
    nh = model.n_hidden
    grads = _lstm_backward(model.params, caches[0], d_feat[:, :nh],
                           suffix="_f")
    grads.update(_lstm_backward(model.params, caches[1], d_feat[:, nh:],
                                suffix="_b"))
    return grads


def _softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=1, keepdims=True)


def rnn_forward(model: RnnModel, sequences: np.ndarray) -> np.ndarray:
    """Class probabilities for (N, T, D) sequences (softmax scores)."""
    x = np.asarray(sequences, dtype=float)
    if x.ndim == 2:
        x = x[None]
    feat, _ = _features_forward(model, x)
    return _softmax(feat @ model.params["Wy"] + model.params["by"])


def _loss_and_grads(model, x, y_idx):
    """Mean cross-entropy and gradients for a batch of sequences."""
    feat, caches = _features_forward(model, x)
    logits = feat @ model.params["Wy"] + model.params["by"]
    probs = _softmax(logits)
    n = x.shape[0]
    eps = 1e-300
    loss = -np.mean(np.log(probs[np.arange(n), y_idx] + eps))
    d_logits = probs.copy()
    d_logits[np.arange(n), y_idx] -= 1.0
    d_logits /= n
    grads = {"Wy": feat.T @ d_logits, "by": d_logits.sum(axis=0)}
    d_feat = d_logits @ model.params["Wy"].T
    grads.update(_features_backward(model, caches, d_feat))
    return loss, grads


def _standardize_fit(x):
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return mean, std


def train_rnn(features: np.ndarray, labels: np.ndarray, kind: str,
              n_hidden: int, n_epochs: int, learning_rate: float = 1e-3,
              batch_size: int = 32, seed: int = 0) -> RnnModel:
    """Train a sequence classifier on (N, 128) features.

    Features are standardized with training-set statistics (stored on the
    model), reshaped to 32x4 sequences, and fit for exactly ``n_epochs``
    epochs of seeded-shuffle minibatch Adam.  The per-epoch training loss
    trace is kept on the returned model.
    """
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise ContractError("training needs at least two classes")
    if n_epochs < 1:
        raise ContractError("n_epochs must be >= 1")
    y_idx = np.searchsorted(classes, labels)

    mean, std = _standardize_fit(features)
    x_seq = sequences_from_features((features - mean) / std)

    model = init_rnn(kind, n_hidden, classes.size, seed)
    model.classes = classes
    model.feat_mean = mean
    model.feat_std = std

    rng = make_rng(seed, 23)
    adam_m = {k: np.zeros_like(v) for k, v in model.params.items()}
    adam_v = {k: np.zeros_like(v) for k, v in model.params.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    n = features.shape[0]
    for _ in range(n_epochs):
        order = rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, batch_size):
            batch = order[start:start + batch_size]
            loss, grads = _loss_and_grads(model, x_seq[batch], y_idx[batch])
            epoch_losses.append(loss)
            step += 1
            for key, grad in grads.items():
                adam_m[key] = beta1 * adam_m[key] + (1 - beta1) * grad
                adam_v[key] = beta2 * adam_v[key] + (1 - beta2) * grad * grad
                m_hat = adam_m[key] / (1 - beta1 ** step)
                v_hat = adam_v[key] / (1 - beta2 ** step)
                model.params[key] -= learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        model.loss_trace.append(float(np.mean(epoch_losses)))
    return model


def rnn_predict(model: RnnModel, features: np.ndarray) -> np.ndarray:
    """Predicted class labels for (N, 128) raw features."""
    features = np.asarray(features, dtype=float)
    x = (features - model.feat_mean) / model.feat_std
    probs = rnn_forward(model, sequences_from_features(x))
    return model.classes[np.argmax(probs, axis=1)]


# ---------------------------------------------------------------------------
# Gradient checking


def grad_check(model: RnnModel, sequences: np.ndarray, labels_idx,
               n_checks: int = 200, step: float = 1e-5,
               seed: int = 0) -> float:
    """Max relative error between BPTT and central finite differences.

    Checks ``n_checks`` randomly chosen parameters spread over every weight
    group.  Pairs where both gradients are below 1e-8 in magnitude count as
    zero error.
    """
    x = np.asarray(sequences, dtype=float)
    y_idx = np.asarray(labels_idx, dtype=int)
    _, grads = _loss_and_grads(model, x, y_idx)
    rng = make_rng(seed, 31)
    keys = sorted(model.params)
    worst = 0.0
    per_group = max(1, int(np.ceil(n_checks / len(keys))))
    for key in keys:
        flat = model.params[key].reshape(-1)
        gflat = grads[key].reshape(-1)
        picks = rng.choice(flat.size, size=min(per_group, flat.size),
                           replace=False)
        for idx in picks:
            keep = flat[idx]
            flat[idx] = keep + step
            up, _ = _loss_and_grads(model, x, y_idx)
            flat[idx] = keep - step
            down, _ = _loss_and_grads(model, x, y_idx)
            flat[idx] = keep
            numeric = (up - down) / (2.0 * step)
            analytic = gflat[idx]
            if abs(numeric) < 1e-8 and abs(analytic) < 1e-8:
                continue
            err = abs(numeric - analytic) / max(abs(numeric), abs(analytic))
            worst = max(worst, err)
    return worst
