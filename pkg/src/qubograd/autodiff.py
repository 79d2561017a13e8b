"""Reverse-mode autodiff over dense 2-D float64 arrays, plus Adam and a gradient checker.

Every value is a (rows, cols) matrix; scalars are 1x1. Operations link Tensor
nodes into a DAG; backward() materializes the tape as a reverse topological
order and applies the chain rule once per node. Distinct graphs are
independent, so separate trainers can run on separate threads.
"""

import numpy as np

__all__ = [
    "Tensor",
    "NonFiniteError",
    "concat_rows",
    "masked_select",
    "gather_rows",
    "dropout",
    "Adam",
    "finite_diff_check",
]


class NonFiniteError(FloatingPointError):
    """A forward value or gradient stopped being finite."""


def _as_matrix(data):
    a = np.asarray(data, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(-1, 1)  # bare vectors become columns
    elif a.ndim != 2:
        raise ValueError(f"tensors are 2-D, got shape {a.shape}")
    return a


class Tensor:
    """One node of the computation DAG; `data` is always a 2-D float64 array."""

    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, name="", _parents=()):
        self.data = _as_matrix(data)
        if not np.isfinite(self.data).all():
            raise NonFiniteError(f"non-finite values in {name or 'tensor'}")
        self.grad = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents = _parents
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    def item(self):
        if self.data.shape != (1, 1):
            raise ValueError(f"item() needs a 1x1 tensor, got {self.data.shape}")
        return float(self.data[0, 0])

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(shape={self.data.shape})"

    # -- op plumbing --------------------------------------------------------

    def _make(self, data, parents, backward, name):
        out = Tensor(data, _parents=parents, name=name)
        out._backward = backward
        return out

    def _need_same_shape(self, other, op):
        if self.data.shape != other.data.shape:
            raise ValueError(f"{op}: shape mismatch {self.data.shape} vs {other.data.shape}")

    # -- core ops ------------------------------------------------------------

    def __matmul__(self, other):
        if self.data.shape[1] != other.data.shape[0]:
            raise ValueError(f"matmul: shape mismatch {self.data.shape} @ {other.data.shape}")
        out_data = self.data @ other.data

        def backward(out):
            if self.grad is not None:
                self.grad += out.grad @ other.data.T
            if other.grad is not None:
                other.grad += self.data.T @ out.grad

        return self._make(out_data, (self, other), backward, "matmul")

    def t(self):
        def backward(out):
            if self.grad is not None:
                self.grad += out.grad.T

        return self._make(self.data.T.copy(), (self,), backward, "transpose")

    def __add__(self, other):
        if not isinstance(other, Tensor):
            return self.shift(float(other))
        self._need_same_shape(other, "add")

        def backward(out):
            if self.grad is not None:
                self.grad += out.grad
            if other.grad is not None:
                other.grad += out.grad

        return self._make(self.data + other.data, (self, other), backward, "add")

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other if isinstance(other, Tensor) else -float(other))

    def __rsub__(self, other):
        return (-self).shift(float(other))

    def __mul__(self, other):
        if not isinstance(other, Tensor):
            s = float(other)

            def backward_scalar(out):
                if self.grad is not None:
                    self.grad += s * out.grad

            return self._make(self.data * s, (self,), backward_scalar, "scale")
        self._need_same_shape(other, "mul")

        def backward(out):
            if self.grad is not None:
                self.grad += other.data * out.grad
            if other.grad is not None:
                other.grad += self.data * out.grad

        return self._make(self.data * other.data, (self, other), backward, "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        self._need_same_shape(other, "div")
        out_data = self.data / other.data

        def backward(out):
            if self.grad is not None:
                self.grad += out.grad / other.data
            if other.grad is not None:
                other.grad += -out.grad * out_data / other.data

        return self._make(out_data, (self, other), backward, "div")

    def shift(self, c):
        """Add a plain constant to every entry."""
        c = float(c)

        def backward(out):
            if self.grad is not None:
                self.grad += out.grad

        return self._make(self.data + c, (self,), backward, "shift")

    def sum(self):
        def backward(out):
            if self.grad is not None:
                self.grad += np.full_like(self.data, out.grad[0, 0])

        return self._make(self.data.sum(), (self,), backward, "sum")

    # -- nonlinearities -------------------------------------------------------

    def relu(self):
        def backward(out):
            if self.grad is not None:
                self.grad += (self.data > 0) * out.grad

        return self._make(np.maximum(self.data, 0.0), (self,), backward, "relu")

    def leaky_relu(self, slope=0.2):
        def backward(out):
            if self.grad is not None:
                self.grad += np.where(self.data > 0, 1.0, slope) * out.grad

        return self._make(np.where(self.data > 0, self.data, slope * self.data),
                          (self,), backward, "leaky_relu")

    def elu(self):
        # alpha = 1: x for x > 0, exp(x) - 1 otherwise
        out_data = np.where(self.data > 0, self.data, np.expm1(self.data))

        def backward(out):
            if self.grad is not None:
                self.grad += np.where(self.data > 0, 1.0, out_data + 1.0) * out.grad

        return self._make(out_data, (self,), backward, "elu")

    def sigmoid(self):
        x = self.data
        out_data = np.empty_like(x)
        pos = x >= 0
        out_data[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        out_data[~pos] = ex / (1.0 + ex)

        def backward(out):
            if self.grad is not None:
                self.grad += out_data * (1.0 - out_data) * out.grad

        return self._make(out_data, (self,), backward, "sigmoid")

    def tanh(self):
        out_data = np.tanh(self.data)

        def backward(out):
            if self.grad is not None:
                self.grad += (1.0 - out_data * out_data) * out.grad

        return self._make(out_data, (self,), backward, "tanh")

    def exp(self):
        out_data = np.exp(self.data)

        def backward(out):
            if self.grad is not None:
                self.grad += out_data * out.grad

        return self._make(out_data, (self,), backward, "exp")

    def log(self):
        if (self.data <= 0).any():
            raise NonFiniteError("log of a non-positive value")

        def backward(out):
            if self.grad is not None:
                self.grad += out.grad / self.data

        return self._make(np.log(self.data), (self,), backward, "log")

    # -- backward -------------------------------------------------------------

    def backward(self):
        """Reverse pass from a 1x1 root; leaves every reached node's grad populated."""
        if self.data.shape != (1, 1):
            raise ValueError(f"backward() needs a scalar root, got shape {self.data.shape}")
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:  # iterative DFS; episode graphs get too deep for recursion
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        for node in order:
            node.grad = np.zeros_like(node.data)
        self.grad = np.ones((1, 1))
        for node in reversed(order):
            if node._backward is not None:
                node._backward(node)


def concat_rows(tensors):
    """Stack tensors with equal column counts along the row axis."""
    tensors = list(tensors)
    if not tensors:
        raise ValueError("concat_rows needs at least one tensor")
    cols = tensors[0].data.shape[1]
    for t in tensors:
        if t.data.shape[1] != cols:
            raise ValueError("concat_rows: column counts differ")
    splits = np.cumsum([t.data.shape[0] for t in tensors])[:-1]

    def backward(out):
        for t, g in zip(tensors, np.split(out.grad, splits, axis=0)):
            if t.grad is not None:
                t.grad += g

    out = Tensor(np.concatenate([t.data for t in tensors], axis=0),
                 _parents=tuple(tensors), name="concat_rows")
    out._backward = backward
    return out


def masked_select(x, mask):
    """Entries of x where the fixed boolean mask holds, as a column vector."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x.data.shape:
        raise ValueError(f"masked_select: mask shape {mask.shape} vs {x.data.shape}")

    def backward(out):
        if x.grad is not None:
            x.grad[mask] += out.grad.ravel()

    out = Tensor(x.data[mask].reshape(-1, 1), _parents=(x,), name="masked_select")
    out._backward = backward
    return out


def gather_rows(x, indices):
    """Rows of x at the fixed index list; gradient scatter-adds back."""
    idx = np.asarray(indices, dtype=np.int64).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= x.data.shape[0]):
        raise ValueError("gather_rows: index out of range")

    def backward(out):
        if x.grad is not None:
            np.add.at(x.grad, idx, out.grad)

    out = Tensor(x.data[idx], _parents=(x,), name="gather_rows")
    out._backward = backward
    return out


def dropout(x, rate, rng, train=True):
    """Inverted-scaling dropout; identity when rate is 0 or train is False."""
    if not 0.0 <= rate < 1.0:
        raise ValueError("dropout rate must be in [0, 1)")
    if rate == 0.0 or not train:
        return x
    keep = (rng.random(x.data.shape) >= rate) / (1.0 - rate)

    def backward(out):
        if x.grad is not None:
            x.grad += keep * out.grad

    out = Tensor(x.data * keep, _parents=(x,), name="dropout")
    out._backward = backward
    return out


class Adam:
    """Standard Adam with bias correction over a fixed parameter list."""

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]
        self.t = 0

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        self.t += 1
        for i, p in enumerate(self.params):
            g = p.grad
            if g is None:
                continue
            if not np.isfinite(g).all():
                raise NonFiniteError(f"non-finite gradient for {p.name or 'parameter'}")
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g
            m_hat = self.m[i] / (1.0 - self.beta1 ** self.t)
            v_hat = self.v[i] / (1.0 - self.beta2 ** self.t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
            if not np.isfinite(p.data).all():
                raise NonFiniteError(f"non-finite update for {p.name or 'parameter'}")


def finite_diff_check(loss_fn, params, h=1e-4, max_coords=24, seed=0):
    """Max relative error between backward() and central differences.

    loss_fn must be a pure, deterministic closure over params returning a 1x1
    Tensor (disable dropout). Up to max_coords coordinates per parameter are
    probed; the error denominator is max(|analytic|, |numeric|, 1e-8).
    """
    loss = loss_fn()
    loss.backward()
    analytic = [None if p.grad is None else p.grad.copy() for p in params]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for p, g in zip(params, analytic):
        size = p.data.size
        if size <= max_coords:
            coords = np.arange(size)
        else:
            coords = rng.choice(size, size=max_coords, replace=False)
        cols = p.data.shape[1]
        for c in coords:
            i, j = divmod(int(c), cols)
            orig = p.data[i, j]
            p.data[i, j] = orig + h
            f_plus = loss_fn().item()
            p.data[i, j] = orig - h
            f_minus = loss_fn().item()
            p.data[i, j] = orig
            numeric = (f_plus - f_minus) / (2.0 * h)
            exact = 0.0 if g is None else float(g[i, j])
            err = abs(exact - numeric) / max(abs(exact), abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst
