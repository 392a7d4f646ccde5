"""Pure-Python tape kernel for second-order jet evaluation.

Fallback backend with the same calling convention as the compiled
``_jetcore`` extension.  Opcode numbers defined here are the single source
of truth; the .pyx kernel mirrors them and ``OPCODE_VERSION`` guards the
pairing at import time.

A tape is a straight-line SSA program: instruction ``i`` writes register
``i``, operands reference earlier registers (or the constant/variable
tables for CONST/VAR).  Each register holds a jet (value, gradient,
Hessian); Hessians are written lower-triangle-first and mirrored so they
stay exactly symmetric.
"""

import math

import numpy as np

OPCODE_VERSION = 1

OP_CONST = 0
OP_VAR = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_NEG = 6
OP_POWI = 7
OP_POWC = 8
OP_SIN = 9
OP_COS = 10
OP_SINH = 11
OP_COSH = 12
OP_TANH = 13
OP_EXP = 14
OP_LN = 15
OP_SQRT = 16
OP_ABS = 17

ERR_DIV_ZERO = 1
ERR_LN_DOMAIN = 2
ERR_SQRT_DOMAIN = 3
ERR_POW_DOMAIN = 4
ERR_ABS_DERIV = 5
ERR_BAD_OP = 6

STATUS_OK = -1


def _status(idx, kind):
    return (idx << 4) | kind


def eval_tape(ops, ia, ib, consts, nvars, point, val, grad, hess):
    """Run the tape; fill val/grad/hess rows per register.

    Returns STATUS_OK or an encoded (instruction index << 4 | error kind).
    """
    n = len(ops)
    for idx in range(n):
        op = ops[idx]
        a = ia[idx]
        b = ib[idx]
        if op == OP_CONST:
            val[idx] = consts[a]
            grad[idx, :] = 0.0
            hess[idx, :, :] = 0.0
        elif op == OP_VAR:
            val[idx] = point[a]
            grad[idx, :] = 0.0
            grad[idx, a] = 1.0
            hess[idx, :, :] = 0.0
        elif op == OP_ADD:
            val[idx] = val[a] + val[b]
            grad[idx] = grad[a] + grad[b]
            hess[idx] = hess[a] + hess[b]
        elif op == OP_SUB:
            val[idx] = val[a] - val[b]
            grad[idx] = grad[a] - grad[b]
            hess[idx] = hess[a] - hess[b]
        elif op == OP_MUL:
            va, vb = val[a], val[b]
            val[idx] = va * vb
            grad[idx] = va * grad[b] + vb * grad[a]
            cross = np.outer(grad[a], grad[b])
            hess[idx] = va * hess[b] + vb * hess[a] + cross + cross.T
        elif op == OP_DIV:
            vb = val[b]
            if vb == 0.0:
                return _status(idx, ERR_DIV_ZERO)
            q = val[a] / vb
            val[idx] = q
            gq = (grad[a] - q * grad[b]) / vb
            grad[idx] = gq
            cross = np.outer(gq, grad[b])
            hess[idx] = (hess[a] - q * hess[b] - cross - cross.T) / vb
        elif op == OP_NEG:
            val[idx] = -val[a]
            grad[idx] = -grad[a]
            hess[idx] = -hess[a]
        elif op == OP_POWI:
            va = val[a]
            k = b
            if k == 0:
                val[idx] = 1.0
                grad[idx, :] = 0.0
                hess[idx, :, :] = 0.0
                continue
            if va == 0.0 and k < 0:
                return _status(idx, ERR_DIV_ZERO)
            u = va**k
            du = k * va ** (k - 1) if k != 1 else 1.0
            d2u = k * (k - 1) * va ** (k - 2) if k not in (1, 2) else (0.0 if k == 1 else 2.0)
            _unary(idx, a, u, du, d2u, val, grad, hess)
        elif op == OP_POWC:
            va = val[a]
            c = consts[b]
            if va <= 0.0:
                return _status(idx, ERR_POW_DOMAIN)
            u = va**c
            du = c * va ** (c - 1.0)
            d2u = c * (c - 1.0) * va ** (c - 2.0)
            _unary(idx, a, u, du, d2u, val, grad, hess)
        elif op == OP_SIN:
            va = val[a]
            s, c = math.sin(va), math.cos(va)
            _unary(idx, a, s, c, -s, val, grad, hess)
        elif op == OP_COS:
            va = val[a]
            s, c = math.sin(va), math.cos(va)
            _unary(idx, a, c, -s, -c, val, grad, hess)
        elif op == OP_SINH:
            va = val[a]
            sh, ch = math.sinh(va), math.cosh(va)
            _unary(idx, a, sh, ch, sh, val, grad, hess)
        elif op == OP_COSH:
            va = val[a]
            sh, ch = math.sinh(va), math.cosh(va)
            _unary(idx, a, ch, sh, ch, val, grad, hess)
        elif op == OP_TANH:
            u = math.tanh(val[a])
            s = 1.0 - u * u
            _unary(idx, a, u, s, -2.0 * u * s, val, grad, hess)
        elif op == OP_EXP:
            u = math.exp(val[a])
            _unary(idx, a, u, u, u, val, grad, hess)
        elif op == OP_LN:
            va = val[a]
            if va <= 0.0:
                return _status(idx, ERR_LN_DOMAIN)
            _unary(idx, a, math.log(va), 1.0 / va, -1.0 / (va * va), val, grad, hess)
        elif op == OP_SQRT:
            va = val[a]
            if va <= 0.0:
                return _status(idx, ERR_SQRT_DOMAIN)
            r = math.sqrt(va)
            _unary(idx, a, r, 0.5 / r, -0.25 / (r * va), val, grad, hess)
        elif op == OP_ABS:
            va = val[a]
            if va == 0.0:
                return _status(idx, ERR_ABS_DERIV)
            sign = 1.0 if va > 0.0 else -1.0
            _unary(idx, a, abs(va), sign, 0.0, val, grad, hess)
        else:
            return _status(idx, ERR_BAD_OP)
    return STATUS_OK


def _unary(idx, a, u, du, d2u, val, grad, hess):
    val[idx] = u
    grad[idx] = du * grad[a]
    outer = np.outer(grad[a], grad[a])
    hess[idx] = du * hess[a] + d2u * outer
