"""
Truncated power series in extended precision
A series f(x) = c0 + c1*x + ... + cK*x^K is stored as its Taylor coefficients
in a numpy clongdouble array. Arithmetic and elementary functions of series
return new series of the lowest order involved, so the k-th derivative of a
composite expression is k! times coefficient k of the composite series.
"""

import math

import numpy as np

CLD = np.clongdouble
LD = np.longdouble


class PowerSeries:
    """Truncated Taylor series with clongdouble coefficients"""

    __array_priority__ = 100.

    def __init__(self, c=None, order=None):
        if isinstance(c, PowerSeries):
            c = c.c
        if order is None:
            if c is None or len(c) == 0:
                raise ValueError("empty coefficient array")
            order = len(c) - 1
        if order < 0:
            raise ValueError(f"order cannot be less than zero: order = {order}")
        self.c = np.zeros(order + 1, dtype=CLD)
        if c is not None:
            c = np.asarray(c, dtype=CLD)
            n = min(len(c), order + 1)
            self.c[:n] = c[:n]

    @classmethod
    def variable(cls, s, order):
        """Series of s + x, the independent variable expanded at s"""
        ps = cls(order=order)
        ps.c[0] = s
        if order >= 1:
            ps.c[1] = 1
        return ps

    @classmethod
    def constant(cls, value, order):
        ps = cls(order=order)
        ps.c[0] = value
        return ps

    @classmethod
    def exp_linear(cls, a, b, order):
        """Series of exp(a + b*x)"""
        ps = cls(order=order)
        term = np.exp(CLD(a))
        b = CLD(b)
        for m in range(order + 1):
            ps.c[m] = term
            term = term * b / (m + 1)
        return ps

    @property
    def order(self):
        return len(self.c) - 1

    def __len__(self):
        return len(self.c)

    def __iter__(self):
        return iter(self.c)

    def __getitem__(self, i):
        return self.c[i]

    def __add__(self, x):
        if isinstance(x, PowerSeries):
            order = min(self.order, x.order)
            return PowerSeries(self.c[:order + 1] + x.c[:order + 1])
        ans = PowerSeries(self.c)
        ans.c[0] += x
        return ans

    def __radd__(self, x):
        return self + x

    def __sub__(self, x):
        if isinstance(x, PowerSeries):
            order = min(self.order, x.order)
            return PowerSeries(self.c[:order + 1] - x.c[:order + 1])
        ans = PowerSeries(self.c)
        ans.c[0] -= x
        return ans

    def __rsub__(self, x):
        return -self + x

    def __neg__(self):
        return PowerSeries(-self.c)

    def __mul__(self, x):
        if isinstance(x, PowerSeries):
            order = min(self.order, x.order)
            ans = np.zeros(order + 1, dtype=CLD)
            for i in range(order + 1):
                if self.c[i] != 0:
                    ans[i:] += self.c[i] * x.c[:order + 1 - i]
            return PowerSeries(ans)
        return PowerSeries(self.c * x)

    def __rmul__(self, x):
        return self * x

    def __truediv__(self, x):
        if not isinstance(x, PowerSeries):
            return PowerSeries(self.c / x)
        if x.c[0] == 0:
            raise ZeroDivisionError("leading coefficient in denominator equals zero")
        order = min(self.order, x.order)
        ans = np.zeros(order + 1, dtype=CLD)
        for n in range(order + 1):
            tot = self.c[n]
            for i in range(n):
                tot = tot - ans[i] * x.c[n - i]
            ans[n] = tot / x.c[0]
        return PowerSeries(ans)

    def __rtruediv__(self, x):
        return PowerSeries.constant(x, self.order) / self

    def __pow__(self, alpha):
        if not isinstance(alpha, (int, np.integer)) or alpha < 0:
            raise ValueError("only non-negative integer powers are supported")
        ans = PowerSeries.constant(1, self.order)
        base = self
        while alpha > 0:
            if alpha % 2 == 1:
                ans = ans * base
            alpha //= 2
            if alpha:
                base = base * base
        return ans

    def mul_linear(self, a):
        """Multiply by the series (a + x) in O(order)"""
        ans = self.c * CLD(a)
        ans[1:] += self.c[:-1]
        return PowerSeries(ans)

    def exp(self):
        f = np.exp(self.c[0])
        ans = np.zeros_like(self.c)
        ans[0] = f
        for m in range(1, self.order + 1):
            j = np.arange(1, m + 1)
            ans[m] = np.sum(j * self.c[1:m + 1] * ans[m - 1::-1][:m]) / m
        return PowerSeries(ans)

    def log(self):
        a0 = self.c[0]
        if a0 == 0:
            raise ZeroDivisionError("log of a series with zero constant term")
        ans = np.zeros_like(self.c)
        ans[0] = np.log(a0)
        for m in range(1, self.order + 1):
            tot = self.c[m]
            for j in range(1, m):
                tot = tot - j * ans[j] * self.c[m - j] / m
            ans[m] = tot / a0
        return PowerSeries(ans)

    def shift_sign(self):
        """Series of f(-x): the expansion of s -> f(c - s) re-centred"""
        signs = np.where(np.arange(self.order + 1) % 2 == 0, 1, -1)
        return PowerSeries(self.c * signs)

    def derivatives(self):
        return np.array([self.c[m] * math.factorial(m) for m in range(self.order + 1)], dtype=CLD)

    def __repr__(self):
        return "PowerSeries(%s)" % str(self.c.tolist())
