# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trajectory walkers.

Mirrors the pure-Python backend (_pykernel) on 128-bit integers.  Walks
whose values would leave the native range report OVERFLOW and the caller
retries with the pure backend, so results are identical either way;
cutoffs up to ~8.5e37 stay entirely native.
"""

from libc.stdlib cimport calloc, free, malloc

cdef extern from *:
    """
    typedef __int128 gx_i128;
    typedef unsigned __int128 gx_u128;
    """
    ctypedef long long i128 "gx_i128"
    ctypedef unsigned long long u128 "gx_u128"

BACKEND_NAME = "compiled"

ENTERED = 0
NEW_CYCLE = 1
STEP_CUTOFF = 2
MAG_CUTOFF = 3
OVERFLOW = 4

cdef enum:
    C_ENTERED = 0
    C_NEW_CYCLE = 1
    C_STEP_CUTOFF = 2
    C_MAG_CUTOFF = 3
    C_OVERFLOW = 4

_PARAM_BITS = 62          # |m|, |r| must fit well below the working range


class KernelUnsupported(ValueError):
    """Mapping or cutoff outside the compiled kernel's native range."""


cdef object _i128_to_py(i128 v):
    cdef bint neg = v < 0
    cdef u128 u = <u128>(-v) if neg else <u128>v
    cdef unsigned long long hi = <unsigned long long>(u >> 64)
    cdef unsigned long long lo = <unsigned long long>u
    py = (int(hi) << 64) | int(lo)
    return -py if neg else py


cdef bint _py_to_i128(object obj, i128 *out) except? 0:
    cdef object n = int(obj)
    cdef bint neg = n < 0
    cdef object a = -n if neg else n
    if a.bit_length() > 126:
        return 0
    cdef unsigned long long hi = (a >> 64) & 0xFFFFFFFFFFFFFFFF
    cdef unsigned long long lo = a & 0xFFFFFFFFFFFFFFFF
    cdef i128 v = <i128>(((<u128>hi) << 64) | (<u128>lo))
    out[0] = -v if neg else v
    return 1


cdef class KernelMap:
    cdef long long d
    cdef i128 *ms
    cdef i128 *rs
    cdef i128 safe_cap
    cdef object safe_cap_py

    def __cinit__(self, d, branches):
        cdef Py_ssize_t n = len(branches)
        cdef Py_ssize_t i
        cdef i128 maxm = 1
        cdef i128 maxr = 0
        cdef i128 av
        if d < 2 or n != d or d > (1 << 31):
            raise KernelUnsupported("modulus out of kernel range")
        self.d = d
        self.ms = <i128 *>malloc(n * sizeof(i128))
        self.rs = <i128 *>malloc(n * sizeof(i128))
        if self.ms == NULL or self.rs == NULL:
            raise MemoryError()
        for i in range(n):
            m, r = branches[i]
            if abs(m).bit_length() >= _PARAM_BITS or abs(r).bit_length() >= _PARAM_BITS:
                raise KernelUnsupported("branch parameters out of kernel range")
            self.ms[i] = <long long>m
            self.rs[i] = <long long>r
            av = self.ms[i] if self.ms[i] >= 0 else -self.ms[i]
            if av > maxm:
                maxm = av
            av = self.rs[i] if self.rs[i] >= 0 else -self.rs[i]
            if av > maxr:
                maxr = av
        # |m*x - r| must stay below 2^126 whenever |x| <= safe_cap
        self.safe_cap = (((<i128>1) << 126) - maxr) // maxm
        self.safe_cap_py = _i128_to_py(self.safe_cap)

    def __dealloc__(self):
        if self.ms != NULL:
            free(self.ms)
        if self.rs != NULL:
            free(self.rs)


def prepare(d, branches):
    return KernelMap(d, branches)


cdef inline unsigned long long _hash_key(i128 k) noexcept nogil:
    cdef unsigned long long x
    x = <unsigned long long>((<u128>k) >> 64) ^ <unsigned long long>(<u128>k)
    x ^= x >> 33
    x *= <unsigned long long>0x9E3779B97F4A7C15
    x ^= x >> 29
    return x


cdef class MemberTable:
    cdef i128 *keys
    cdef int *vals
    cdef unsigned char *used
    cdef unsigned long long mask
    cdef Py_ssize_t count

    def __cinit__(self, items=()):
        cdef list entries = list(items)
        cdef unsigned long long size = 16
        cdef i128 key
        while size < 4 * (<unsigned long long>len(entries)) + 16:
            size <<= 1
        self.mask = size - 1
        self.keys = <i128 *>malloc(size * sizeof(i128))
        self.vals = <int *>malloc(size * sizeof(int))
        self.used = <unsigned char *>calloc(size, 1)
        if self.keys == NULL or self.vals == NULL or self.used == NULL:
            raise MemoryError()
        self.count = 0
        for value, cid in entries:
            # Values beyond the native range are unreachable in kernel
            # walks (the walk overflows first), so skipping them is safe.
            if _py_to_i128(value, &key):
                self._insert(key, cid)

    def __dealloc__(self):
        if self.keys != NULL:
            free(self.keys)
        if self.vals != NULL:
            free(self.vals)
        if self.used != NULL:
            free(self.used)

    cdef void _insert(self, i128 key, int cid) noexcept:
        cdef unsigned long long idx = _hash_key(key) & self.mask
        while self.used[idx]:
            if self.keys[idx] == key:
                self.vals[idx] = cid
                return
            idx = (idx + 1) & self.mask
        self.used[idx] = 1
        self.keys[idx] = key
        self.vals[idx] = cid
        self.count += 1

    cdef int lookup(self, i128 key) noexcept nogil:
        cdef unsigned long long idx = _hash_key(key) & self.mask
        while self.used[idx]:
            if self.keys[idx] == key:
                return self.vals[idx]
            idx = (idx + 1) & self.mask
        return -1

    def get(self, value):
        cdef i128 key
        if not _py_to_i128(value, &key):
            return -1
        return self.lookup(key)

    def __len__(self):
        return self.count


cdef inline i128 _step(KernelMap pmap, i128 x) noexcept nogil:
    cdef long long b = <long long>(x % pmap.d)
    if b < 0:
        b += pmap.d
    return (pmap.ms[b] * x - pmap.rs[b]) // pmap.d


cdef int _resolve_cap(KernelMap pmap, object max_magnitude, i128 *cap) except -1:
    """cap = min(max_magnitude, safe_cap); returns 1 when the user cutoff
    binds (exceeding the cap means MAG_CUTOFF, not OVERFLOW)."""
    if max_magnitude >= pmap.safe_cap_py:
        cap[0] = pmap.safe_cap
        return 0
    _py_to_i128(max_magnitude, cap)
    return 1


def walk_brent(KernelMap pmap, start, max_steps, max_magnitude, MemberTable members):
    """Same contract as the pure backend, plus the OVERFLOW outcome."""
    cdef i128 cap, x0, hare, tortoise, ahead, tail, av
    cdef long long msteps, apps, power, lam, mu, i
    cdef int over_code, code, cid
    cdef i128 *buf

    if max_steps < 0 or max_steps >= (1 << 60):
        return (OVERFLOW, 0, None)
    msteps = max_steps
    over_code = C_MAG_CUTOFF if _resolve_cap(pmap, max_magnitude, &cap) else C_OVERFLOW

    if not _py_to_i128(start, &x0):
        return (MAG_CUTOFF, 0, None) if abs(start) > max_magnitude else (OVERFLOW, 0, None)
    av = -x0 if x0 < 0 else x0
    if av > cap:
        return (<int>over_code, 0, None)
    cid = members.lookup(x0)
    if cid >= 0:
        return (ENTERED, 0, cid)
    if msteps == 0:
        return (STEP_CUTOFF, 0, None)

    code = -1
    cid = -1
    apps = 0
    lam = 0
    mu = 0
    tail = 0
    with nogil:
        power = 1
        lam = 1
        tortoise = x0
        hare = _step(pmap, x0)
        apps = 1
        av = -hare if hare < 0 else hare
        if av > cap:
            code = over_code
        else:
            cid = members.lookup(hare)
            if cid >= 0:
                code = C_ENTERED
        while code < 0 and tortoise != hare:
            if power == lam:
                tortoise = hare
                power <<= 1
                lam = 0
            if apps == msteps:
                code = C_STEP_CUTOFF
                break
            hare = _step(pmap, hare)
            apps += 1
            av = -hare if hare < 0 else hare
            if av > cap:
                code = over_code
                break
            cid = members.lookup(hare)
            if cid >= 0:
                code = C_ENTERED
                break
            lam += 1
        if code < 0:
            # period found: locate the entry point
            ahead = x0
            for i in range(lam):
                ahead = _step(pmap, ahead)
            tail = x0
            mu = 0
            while tail != ahead:
                tail = _step(pmap, tail)
                ahead = _step(pmap, ahead)
                mu += 1
            code = C_NEW_CYCLE

    if code == C_ENTERED:
        return (ENTERED, apps, cid)
    if code == C_STEP_CUTOFF:
        return (STEP_CUTOFF, msteps, None)
    if code == C_MAG_CUTOFF:
        return (MAG_CUTOFF, apps, None)
    if code == C_OVERFLOW:
        return (OVERFLOW, apps, None)

    buf = <i128 *>malloc(lam * sizeof(i128))
    if buf == NULL:
        raise MemoryError()
    with nogil:
        for i in range(lam):
            buf[i] = tail
            tail = _step(pmap, tail)
    elements = []
    for i in range(lam):
        elements.append(_i128_to_py(buf[i]))
    free(buf)
    return (NEW_CYCLE, mu, elements)


def walk_tally(KernelMap pmap, start, max_steps, max_magnitude, MemberTable members):
    cdef i128 cap, x, av
    cdef long long msteps, j
    cdef int over_code, code, cid

    if max_steps < 0 or max_steps >= (1 << 60):
        return (OVERFLOW, 0, -1)
    msteps = max_steps
    over_code = C_MAG_CUTOFF if _resolve_cap(pmap, max_magnitude, &cap) else C_OVERFLOW

    if not _py_to_i128(start, &x):
        return (MAG_CUTOFF, 0, -1) if abs(start) > max_magnitude else (OVERFLOW, 0, -1)
    av = -x if x < 0 else x
    if av > cap:
        return (<int>over_code, 0, -1)

    code = C_STEP_CUTOFF
    cid = -1
    j = 0
    with nogil:
        while True:
            cid = members.lookup(x)
            if cid >= 0:
                code = C_ENTERED
                break
            if j == msteps:
                break
            x = _step(pmap, x)
            j += 1
            av = -x if x < 0 else x
            if av > cap:
                code = over_code
                break

    if code == C_ENTERED:
        return (ENTERED, j, cid)
    if code == C_MAG_CUTOFF:
        return (MAG_CUTOFF, j, -1)
    if code == C_OVERFLOW:
        return (OVERFLOW, j, -1)
    return (STEP_CUTOFF, msteps, -1)
