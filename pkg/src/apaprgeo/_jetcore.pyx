# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tape kernel for second-order jet evaluation.

Mirrors ``_jetcore_py`` opcode for opcode; see that module for the tape
layout.  The instruction loop runs without the GIL, so concurrent
evaluation from several threads scales.
"""

from libc.math cimport cos, cosh, exp, fabs, log, pow, sin, sinh, sqrt, tanh

OPCODE_VERSION = 1

DEF OP_CONST = 0
DEF OP_VAR = 1
DEF OP_ADD = 2
DEF OP_SUB = 3
DEF OP_MUL = 4
DEF OP_DIV = 5
DEF OP_NEG = 6
DEF OP_POWI = 7
DEF OP_POWC = 8
DEF OP_SIN = 9
DEF OP_COS = 10
DEF OP_SINH = 11
DEF OP_COSH = 12
DEF OP_TANH = 13
DEF OP_EXP = 14
DEF OP_LN = 15
DEF OP_SQRT = 16
DEF OP_ABS = 17

DEF ERR_DIV_ZERO = 1
DEF ERR_LN_DOMAIN = 2
DEF ERR_SQRT_DOMAIN = 3
DEF ERR_POW_DOMAIN = 4
DEF ERR_ABS_DERIV = 5
DEF ERR_BAD_OP = 6


cdef inline void _unary(Py_ssize_t idx, int a, double u, double du, double d2u,
                        int nv, double[:] val, double[:, :] grad,
                        double[:, :, :] hess) noexcept nogil:
    cdef Py_ssize_t k, l
    cdef double h
    val[idx] = u
    for k in range(nv):
        grad[idx, k] = du * grad[a, k]
    for k in range(nv):
        for l in range(k + 1):
            # association matches the numpy kernel so backends agree bitwise
            h = du * hess[a, k, l] + d2u * (grad[a, k] * grad[a, l])
            hess[idx, k, l] = h
            hess[idx, l, k] = h


def eval_tape(const int[:] ops, const int[:] ia, const int[:] ib,
              const double[:] consts, int nvars, const double[:] point,
              double[:] val, double[:, :] grad, double[:, :, :] hess):
    """Run the tape; returns -1 on success or (index << 4 | error kind)."""
    cdef Py_ssize_t n = ops.shape[0]
    cdef long status
    with nogil:
        status = _run(ops, ia, ib, consts, nvars, point, val, grad, hess, n)
    return status


cdef long _run(const int[:] ops, const int[:] ia, const int[:] ib,
               const double[:] consts, int nv, const double[:] point,
               double[:] val, double[:, :] grad, double[:, :, :] hess,
               Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t idx, k, l
    cdef int op, a, b, kexp
    cdef double va, vb, q, u, du, d2u, h, s, c, sign
    for idx in range(n):
        op = ops[idx]
        a = ia[idx]
        b = ib[idx]
        if op == OP_CONST:
            val[idx] = consts[a]
            for k in range(nv):
                grad[idx, k] = 0.0
                for l in range(nv):
                    hess[idx, k, l] = 0.0
        elif op == OP_VAR:
            val[idx] = point[a]
            for k in range(nv):
                grad[idx, k] = 0.0
                for l in range(nv):
                    hess[idx, k, l] = 0.0
            grad[idx, a] = 1.0
        elif op == OP_ADD:
            val[idx] = val[a] + val[b]
            for k in range(nv):
                grad[idx, k] = grad[a, k] + grad[b, k]
                for l in range(nv):
                    hess[idx, k, l] = hess[a, k, l] + hess[b, k, l]
        elif op == OP_SUB:
            val[idx] = val[a] - val[b]
            for k in range(nv):
                grad[idx, k] = grad[a, k] - grad[b, k]
                for l in range(nv):
                    hess[idx, k, l] = hess[a, k, l] - hess[b, k, l]
        elif op == OP_MUL:
            va = val[a]
            vb = val[b]
            val[idx] = va * vb
            for k in range(nv):
                grad[idx, k] = va * grad[b, k] + vb * grad[a, k]
            for k in range(nv):
                for l in range(k + 1):
                    h = (va * hess[b, k, l] + vb * hess[a, k, l]
                         + grad[a, k] * grad[b, l] + grad[b, k] * grad[a, l])
                    hess[idx, k, l] = h
                    hess[idx, l, k] = h
        elif op == OP_DIV:
            vb = val[b]
            if vb == 0.0:
                return (idx << 4) | ERR_DIV_ZERO
            q = val[a] / vb
            val[idx] = q
            for k in range(nv):
                grad[idx, k] = (grad[a, k] - q * grad[b, k]) / vb
            for k in range(nv):
                for l in range(k + 1):
                    h = (hess[a, k, l] - q * hess[b, k, l]
                         - grad[idx, k] * grad[b, l] - grad[b, k] * grad[idx, l]) / vb
                    hess[idx, k, l] = h
                    hess[idx, l, k] = h
        elif op == OP_NEG:
            val[idx] = -val[a]
            for k in range(nv):
                grad[idx, k] = -grad[a, k]
                for l in range(nv):
                    hess[idx, k, l] = -hess[a, k, l]
        elif op == OP_POWI:
            va = val[a]
            kexp = b
            if kexp == 0:
                val[idx] = 1.0
                for k in range(nv):
                    grad[idx, k] = 0.0
                    for l in range(nv):
                        hess[idx, k, l] = 0.0
                continue
            if va == 0.0 and kexp < 0:
                return (idx << 4) | ERR_DIV_ZERO
            u = pow(va, kexp)
            if kexp == 1:
                du = 1.0
                d2u = 0.0
            elif kexp == 2:
                du = 2.0 * va
                d2u = 2.0
            else:
                du = kexp * pow(va, kexp - 1)
                d2u = kexp * (kexp - 1) * pow(va, kexp - 2)
            _unary(idx, a, u, du, d2u, nv, val, grad, hess)
        elif op == OP_POWC:
            va = val[a]
            c = consts[b]
            if va <= 0.0:
                return (idx << 4) | ERR_POW_DOMAIN
            u = pow(va, c)
            du = c * pow(va, c - 1.0)
            d2u = c * (c - 1.0) * pow(va, c - 2.0)
            _unary(idx, a, u, du, d2u, nv, val, grad, hess)
        elif op == OP_SIN:
            va = val[a]
            s = sin(va)
            c = cos(va)
            _unary(idx, a, s, c, -s, nv, val, grad, hess)
        elif op == OP_COS:
            va = val[a]
            s = sin(va)
            c = cos(va)
            _unary(idx, a, c, -s, -c, nv, val, grad, hess)
        elif op == OP_SINH:
            va = val[a]
            s = sinh(va)
            c = cosh(va)
            _unary(idx, a, s, c, s, nv, val, grad, hess)
        elif op == OP_COSH:
            va = val[a]
            s = sinh(va)
            c = cosh(va)
            _unary(idx, a, c, s, c, nv, val, grad, hess)
        elif op == OP_TANH:
            u = tanh(val[a])
            s = 1.0 - u * u
            _unary(idx, a, u, s, -2.0 * u * s, nv, val, grad, hess)
        elif op == OP_EXP:
            u = exp(val[a])
            _unary(idx, a, u, u, u, nv, val, grad, hess)
        elif op == OP_LN:
            va = val[a]
            if va <= 0.0:
                return (idx << 4) | ERR_LN_DOMAIN
            _unary(idx, a, log(va), 1.0 / va, -1.0 / (va * va), nv, val, grad, hess)
        elif op == OP_SQRT:
            va = val[a]
            if va <= 0.0:
                return (idx << 4) | ERR_SQRT_DOMAIN
            u = sqrt(va)
            _unary(idx, a, u, 0.5 / u, -0.25 / (u * va), nv, val, grad, hess)
        elif op == OP_ABS:
            va = val[a]
            if va == 0.0:
                return (idx << 4) | ERR_ABS_DERIV
            sign = 1.0 if va > 0.0 else -1.0
            _unary(idx, a, fabs(va), sign, 0.0, nv, val, grad, hess)
        else:
            return (idx << 4) | ERR_BAD_OP
    return -1
