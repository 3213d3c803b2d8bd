# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
r"""# Tensors with Reverse-Mode Automatic Differentiation

This submodule holds the numeric currency of ferhelper. A
[Tensor][ferhelper.tensor.Tensor] wraps a row-major numpy array and, if it
requires a gradient, a handle into the autodiff tape. Every differentiable
operation records a [Node][ferhelper.tensor.Node] holding its inputs and a
backward rule. Calling [backward][ferhelper.tensor.backward] on a scalar
collects the reachable nodes into a topologically ordered
[Tape][ferhelper.tensor.Tape], walks it in reverse and accumulates
$\partial L / \partial x$ into the `grad` of every reachable tensor that
requires a gradient.

!!! note
    Only scalar-versus-tensor broadcasting is supported. Layer code in
    [ferhelper.nn][] reshapes explicitly or uses fused operations.

Parameters and activations are 32-bit floats by default; use
[default_dtype][ferhelper.tensor.default_dtype] to switch newly created
tensors to 64-bit, e.g. for finite-difference gradient checks.

"""
import contextlib
import contextvars
import numbers

import numpy as np

from ferhelper.exceptions import ContractError, ShapeError

_GRAD_ENABLED = contextvars.ContextVar('grad_enabled', default=True)
_DEFAULT_DTYPE = contextvars.ContextVar('default_dtype', default=np.float32)

ELEMENTWISE_OPS = ('add', 'sub', 'mul', 'max_with_scalar')


@contextlib.contextmanager
def no_grad():
    """Disable recording of tape nodes within the context.

    The flag is context-local, so worker threads do not interfere.

    """
    token = _GRAD_ENABLED.set(False)
    try:
        yield
    finally:
        _GRAD_ENABLED.reset(token)


def is_grad_enabled():
    """Return if operations currently record tape nodes."""
    return _GRAD_ENABLED.get()


@contextlib.contextmanager
def default_dtype(dtype):
    """Set the floating point type of newly created tensors.

    Parameters
    ----------
    dtype : data-type
        Either `np.float32` or `np.float64`.

    """
    dtype = np.dtype(dtype).type
    if dtype not in {np.float32, np.float64}:
        raise TypeError(f'Only float32 and float64 are supported, not {dtype}')
    token = _DEFAULT_DTYPE.set(dtype)
    try:
        yield
    finally:
        _DEFAULT_DTYPE.reset(token)


def get_default_dtype():
    """Return the floating point type of newly created tensors."""
    return _DEFAULT_DTYPE.get()


class Node:
    """Recorded operation: input handles and the backward rule.

    The backward rule maps the gradient of the output to a tuple holding one
    gradient (or `None`) per input.

    """
    __slots__ = ('inputs', 'backward_rule', 'name')

    def __init__(self, inputs, backward_rule, name):
        self.inputs = tuple(inputs)
        self.backward_rule = backward_rule
        self.name = name

    def __repr__(self):
        """Return representation of class."""
        return f'{self.__class__.__name__}({self.name})'


class Tape:
    """Topologically ordered list of `(node, output)` pairs.

    Every node's inputs precede it, so walking the tape in reverse visits
    each node exactly once after all of its consumers.

    """
    __slots__ = ('_entries',)

    def __init__(self, entries=()):
        self._entries = list(entries)

    @classmethod
    def from_root(cls, root):
        """Collect all nodes reachable from `root` in post-order.

        Parameters
        ----------
        root : Tensor
            Output tensor of the recorded graph.

        Returns
        -------
        tape : Tape
            Topologically sorted tape ending with `root`.

        """
        entries = []
        visited = set()
        stack = [(root, False)]
        while stack:
            tensor, expanded = stack.pop()
            if expanded:
                entries.append((tensor.tape_node, tensor))
                continue
            if tensor.tape_node is None or id(tensor) in visited:
                continue
            visited.add(id(tensor))
            stack.append((tensor, True))
            for parent in tensor.tape_node.inputs:
                if parent.tape_node is not None and id(parent) not in visited:
                    stack.append((parent, False))
        return cls(entries)

    @property
    def nodes(self):
        """Return the recorded nodes in topological order."""
        return [node for node, _ in self._entries]

    def release(self):
        """Detach all outputs from their nodes and free the tape."""
        for _, output in self._entries:
            output.tape_node = None
        self._entries.clear()

    def __len__(self):
        """Return number of recorded nodes."""
        return len(self._entries)

    def __iter__(self):
        """Iterate over `(node, output)` pairs in topological order."""
        return iter(self._entries)

    def __reversed__(self):
        """Iterate over `(node, output)` pairs in reverse order."""
        return reversed(self._entries)


class Tensor:  # noqa: WPS214
    """N-dimensional array of floats with an autodiff tape handle."""
    __slots__ = (
        'data', 'requires_grad', 'grad', 'tape_node', '_retain_grad',
    )

    # let numpy defer binary operators to the tensor
    __array_ufunc__ = None

    def __init__(self, data, requires_grad=False, dtype=None):
        """Initialize a tensor from array-like data.

        Parameters
        ----------
        data : array_like
            Values of the tensor. Every dimension needs to be at least 1.
        requires_grad : bool, optional
            If `True`, gradients are accumulated into `grad`.
        dtype : data-type, optional
            Floating point type, defaults to
            [get_default_dtype][ferhelper.tensor.get_default_dtype].

        """
        if isinstance(data, Tensor):
            data = data.data
        if dtype is None:
            dtype = get_default_dtype()
        data = np.array(data, dtype=dtype)
        if any(dim < 1 for dim in data.shape):
            raise ShapeError(
                f'All dimensions need to be at least 1, got {data.shape}.',
            )
        self.data = data
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.tape_node = None
        self._retain_grad = False

    @classmethod
    def _wrap(cls, data):
        """Wrap an operation result without copying or casting."""
        tensor = object.__new__(cls)
        tensor.data = data
        tensor.requires_grad = False
        tensor.grad = None
        tensor.tape_node = None
        tensor._retain_grad = False  # noqa: WPS437
        return tensor

    @property
    def shape(self):
        """Return the dimension sizes."""
        return self.data.shape

    @property
    def ndim(self):
        """Return the number of dimensions."""
        return self.data.ndim

    @property
    def size(self):
        """Return the number of elements."""
        return self.data.size

    @property
    def dtype(self):
        """Return the floating point type."""
        return self.data.dtype

    @property
    def is_leaf(self):
        """Return if the tensor was not produced by a recorded operation."""
        return self.tape_node is None

    def numpy(self):
        """Return the underlying ndarray (no copy)."""
        return self.data

    def item(self):
        """Return the value of a single-element tensor as float."""
        if self.size != 1:
            raise ShapeError(f'item() needs one element, got {self.shape}.')
        return float(self.data.reshape(-1)[0])

    def retain_grad(self):
        """Keep the gradient of this non-leaf tensor after backward."""
        self._retain_grad = True
        return self

    def zero_grad(self):
        """Reset the accumulated gradient."""
        self.grad = None

    def detach(self):
        """Return a tensor sharing the data but without tape connection."""
        return Tensor._wrap(self.data)

    def astype(self, dtype):
        """Return a detached copy casted to `dtype`."""
        return Tensor._wrap(self.data.astype(dtype))

    def backward(self, retain_tape=False):
        """Backpropagate from this scalar.

        See [backward][ferhelper.tensor.backward].

        """
        backward(self, retain_tape=retain_tape)

    def reshape(self, *shape):
        """Return a reshaped view, see [reshape][ferhelper.tensor.reshape]."""
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = shape[0]
        return reshape(self, shape)

    def sum(self, axis=None):  # noqa: A003
        """Return the sum, see [tensor_sum][ferhelper.tensor.tensor_sum]."""
        return tensor_sum(self, axis=axis)

    def mean(self, axis=None):
        """Return the mean, see [tensor_mean][ferhelper.tensor.tensor_mean]."""
        return tensor_mean(self, axis=axis)

    def _accumulate(self, grad):
        """Add `grad` into the gradient buffer."""
        grad = np.asarray(grad, dtype=self.data.dtype).reshape(self.shape)
        if self.grad is None:
            self.grad = grad.copy()
        else:
            self.grad += grad

    def __add__(self, other):
        """Elementwise addition."""
        return elementwise('add', self, other)

    def __radd__(self, other):
        """Elementwise addition with scalar on the left."""
        return elementwise('add', self, other)

    def __sub__(self, other):
        """Elementwise subtraction."""
        return elementwise('sub', self, other)

    def __rsub__(self, other):
        """Scalar minus tensor."""
        return elementwise('add', elementwise('mul', self, -1.0), other)

    def __mul__(self, other):
        """Elementwise multiplication."""
        return elementwise('mul', self, other)

    def __rmul__(self, other):
        """Elementwise multiplication with scalar on the left."""
        return elementwise('mul', self, other)

    def __neg__(self):
        """Negation."""
        return elementwise('mul', self, -1.0)

    def __matmul__(self, other):
        """Matrix product."""
        return matmul(self, other)

    def __len__(self):
        """Return size of first dimension."""
        return len(self.data)

    def __repr__(self):
        """Return representation of class."""
        grad_str = ', requires_grad=True' if self.requires_grad else ''
        return f'{self.__class__.__name__}({self.data!r}{grad_str})'


def record(data, inputs, backward_rule, name):
    """Wrap `data` and record a tape node if any input requires grad.

    This is the single entry point used by all differentiable operations,
    including the fused layer operations of [ferhelper.nn][].

    Parameters
    ----------
    data : ndarray
        Result of the forward computation.
    inputs : sequence of Tensor
        Inputs of the operation.
    backward_rule : callable
        Maps the output gradient to a tuple of input gradients.
    name : str
        Name of the operation, used for debugging.

    Returns
    -------
    out : Tensor
        Tensor holding `data`.

    """
    out = Tensor._wrap(data)  # noqa: WPS437
    if is_grad_enabled() and any(inp.requires_grad for inp in inputs):
        out.requires_grad = True
        out.tape_node = Node(inputs, backward_rule, name)
    return out


def tensor_from(shape, values):
    """Create a tensor from a shape and a flat list of values.

    Parameters
    ----------
    shape : sequence of int
        Dimension sizes, each at least 1.
    values : sequence of float
        Row-major values, `len(values) == prod(shape)`.

    Returns
    -------
    tensor : Tensor
        Tensor with `requires_grad=False`.

    """
    shape = tuple(int(dim) for dim in shape)
    if not shape or any(dim < 1 for dim in shape):
        raise ShapeError(f'Every dimension needs to be >= 1, got {shape}.')
    values = np.asarray(values, dtype=get_default_dtype()).reshape(-1)
    if values.size != int(np.prod(shape)):
        raise ShapeError(
            f'{values.size} values do not fill a tensor of shape {shape}.',
        )
    return Tensor(values.reshape(shape))


def elementwise(op, a, b):
    """Apply a pointwise operation.

    Parameters
    ----------
    op : {'add', 'sub', 'mul', 'max_with_scalar'}
        Operation to apply.
    a : Tensor
        Left operand, defines the output shape.
    b : Tensor or float
        Right operand of identical shape, or a scalar which is broadcasted.
        `max_with_scalar` requires a scalar.

    Returns
    -------
    out : Tensor
        Result of shape `a.shape`.

    """
    if op not in ELEMENTWISE_OPS:
        raise ValueError(f'Unknown op {op!r}, use one of {ELEMENTWISE_OPS}.')
    if not isinstance(a, Tensor):
        raise TypeError(f'Left operand needs to be a Tensor, not {type(a)}.')

    if isinstance(b, numbers.Real):
        return _elementwise_scalar(op, a, float(b))
    if not isinstance(b, Tensor):
        return NotImplemented
    if op == 'max_with_scalar':
        raise ShapeError('max_with_scalar needs a scalar right operand.')
    if a.shape != b.shape:
        raise ShapeError(f'Shapes {a.shape} and {b.shape} need to agree.')

    if op == 'add':
        return record(
            a.data + b.data, (a, b), lambda grad: (grad, grad), 'add',
        )
    if op == 'sub':
        return record(
            a.data - b.data, (a, b), lambda grad: (grad, -grad), 'sub',
        )
    a_data, b_data = a.data, b.data
    return record(
        a_data * b_data,
        (a, b),
        lambda grad: (grad * b_data, grad * a_data),
        'mul',
    )


def _elementwise_scalar(op, a, scalar):
    """Apply a pointwise operation with a broadcasted scalar."""
    a_data = a.data
    if op == 'add':
        return record(a_data + scalar, (a,), lambda grad: (grad,), 'add')
    if op == 'sub':
        return record(a_data - scalar, (a,), lambda grad: (grad,), 'sub')
    if op == 'mul':
        return record(
            a_data * scalar, (a,), lambda grad: (grad * scalar,), 'mul',
        )
    # subgradient 0 where a == scalar
    mask = a_data > scalar
    return record(
        np.where(mask, a_data, a_data.dtype.type(scalar)),
        (a,),
        lambda grad: (grad * mask,),
        'max_with_scalar',
    )


def add(a, b):
    """Elementwise `a + b`."""
    return elementwise('add', a, b)


def sub(a, b):
    """Elementwise `a - b`."""
    return elementwise('sub', a, b)


def mul(a, b):
    """Elementwise `a * b`."""
    return elementwise('mul', a, b)


def maximum(a, scalar):
    """Elementwise `max(a, scalar)`."""
    return elementwise('max_with_scalar', a, scalar)


def matmul(a, b):
    """Matrix product of two rank-2 tensors.

    The backward rule is $dA = dC B^T$ and $dB = A^T dC$.

    Parameters
    ----------
    a : Tensor
        Matrix of shape `[m, k]`.
    b : Tensor
        Matrix of shape `[k, n]`.

    Returns
    -------
    c : Tensor
        Matrix of shape `[m, n]`.

    """
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(
            f'matmul needs rank-2 tensors, got {a.shape}, {b.shape}',
        )
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f'Inner dimensions of {a.shape} and {b.shape} do not agree.',
        )
    a_data, b_data = a.data, b.data
    return record(
        a_data @ b_data,
        (a, b),
        lambda grad: (grad @ b_data.T, a_data.T @ grad),
        'matmul',
    )


def reshape(a, shape):
    """Return `a` with a new shape of identical element count."""
    shape = tuple(int(dim) for dim in shape)
    try:
        data = a.data.reshape(shape)
    except ValueError as err:
        raise ShapeError(str(err)) from err
    old_shape = a.shape
    return record(
        data, (a,), lambda grad: (grad.reshape(old_shape),), 'reshape',
    )


def tensor_sum(a, axis=None):
    """Sum over all elements or the given axes."""
    data = a.data.sum(axis=axis)
    shape = a.shape

    def backward_rule(grad):
        if axis is not None:
            grad = np.expand_dims(grad, axis)
        return (np.broadcast_to(grad, shape),)

    return record(np.asarray(data), (a,), backward_rule, 'sum')


def tensor_mean(a, axis=None):
    """Mean over all elements or the given axes."""
    axes = range(a.ndim) if axis is None else np.atleast_1d(axis)
    count = int(np.prod([a.shape[ax] for ax in axes]))
    return elementwise('mul', tensor_sum(a, axis=axis), 1 / count)


def backward(root, retain_tape=False):
    """Populate the gradients of all tensors reachable from `root`.

    Gradients are accumulated (`+=`) into leaf tensors requiring a gradient
    and into non-leaf tensors marked with `retain_grad()`. Zeroing is up to
    the caller, e.g. the optimizer's `zero_grad`.

    Parameters
    ----------
    root : Tensor
        Tape-connected tensor with exactly one element.
    retain_tape : bool, optional
        If `False` (default) the tape is freed afterwards, so a second call
        raises. If `True` repeated calls accumulate again.

    """
    if root.size != 1:
        raise ContractError(
            f'backward needs a single-element root, got shape {root.shape}.',
        )
    if root.tape_node is None:
        raise ContractError('Root tensor is not connected to a tape.')

    tape = Tape.from_root(root)
    pending = {id(root): np.ones_like(root.data)}
    root._accumulate(pending[id(root)])  # noqa: WPS437

    for node, output in reversed(tape):
        grad_out = pending.pop(id(output), None)
        if grad_out is None:
            continue
        if output._retain_grad and output is not root:  # noqa: WPS437
            output._accumulate(grad_out)  # noqa: WPS437

        grads_in = node.backward_rule(grad_out)
        for inp, grad_in in zip(node.inputs, grads_in):
            if grad_in is None or not inp.requires_grad:
                continue
            if inp.tape_node is None:
                inp._accumulate(grad_in)  # noqa: WPS437
            elif id(inp) in pending:
                pending[id(inp)] = pending[id(inp)] + grad_in
            else:
                pending[id(inp)] = np.asarray(grad_in)

    if not retain_tape:
        tape.release()


def zero_grads(tensors):
    """Reset the gradients of all given tensors."""
    for tensor in tensors:
        tensor.zero_grad()
