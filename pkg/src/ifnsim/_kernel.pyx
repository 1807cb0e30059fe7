# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernel.

Mirrors ``_kernel_py.advance`` operation for operation (same update
sequence, same floating-point evaluation order) so traces are
bit-identical between the two backends; see that module's docstring for
the per-step sequence.
"""

name = "cython"
compiled = True


def advance(cs, long long n_steps, list fires):
    """Advance ``cs`` in place up to (excluding) step ``n_steps``."""
    cdef double dt = cs.dt
    cdef long long decim = cs.decim
    cdef double[:] v_refr = cs.v_refr
    cdef double[:] v_thr = cs.v_thr
    cdef double[:] arm_level = cs.arm_level
    cdef double[:] gain = cs.gain
    cdef double[:] r_leaky = cs.r_leaky
    cdef long long[:] n_spk = cs.n_spk
    cdef long long[:] tbl_off = cs.tbl_off
    cdef double[:] tbl = cs.tbl
    cdef long long[:] pre = cs.pre
    cdef long long[:] post = cs.post
    cdef double[:] g_min = cs.g_min
    cdef double[:] g_max = cs.g_max
    cdef double[:] v_tp = cs.v_tp
    cdef double[:] v_tm = cs.v_tm
    cdef double[:] eta_p = cs.eta_p
    cdef double[:] eta_d = cs.eta_d
    cdef unsigned char[:] mode = cs.mode
    cdef unsigned char[:] armed = cs.armed
    cdef double[:] v = cs.v
    cdef long long[:] fire_k0 = cs.fire_k0
    cdef double[:] g = cs.g
    cdef double[:] i_stim = cs.i_stim
    cdef double[:] port = cs.port_scratch
    cdef double[:] i_sum = cs.isum_scratch
    cdef long long[:] cur_k = cs.cur_k
    cdef long long[:] cur_n = cs.cur_n
    cdef double[:] cur_di = cs.cur_di
    cdef long long[:] forced_k = cs.forced_k
    cdef long long[:] forced_n = cs.forced_n

    cdef bint flag_state = cs.flag_state
    cdef bint flag_g = cs.flag_g
    cdef bint flag_ports = cs.flag_ports
    cdef double[:, :] rec_v = cs.rec_v
    cdef signed char[:, :] rec_mode = cs.rec_mode
    cdef double[:, :] rec_g = cs.rec_g
    cdef double[:, :] rec_port = cs.rec_port

    cdef long long n_neurons = v.shape[0]
    cdef long long n_syn = pre.shape[0]
    cdef long long n_cur = cur_k.shape[0]
    cdef long long n_forced = forced_k.shape[0]
    cdef long long cp = cs.cur_ptr
    cdef long long fp = cs.forced_ptr
    cdef bint idle_ok = cs.idle_skip_ok

    cdef long long k, i, m, r, j
    cdef long long n_firing = 0
    cdef long long stim_nonzero = 0
    cdef bint was
    cdef double vp, vq, vnet, up, dn, gn, i_tot, v_ss

    for i in range(n_neurons):
        if mode[i] == 1:
            n_firing += 1
        if i_stim[i] != 0.0:
            stim_nonzero += 1

    for k in range(cs.k_next, n_steps):
        while cp < n_cur and cur_k[cp] == k:
            i = cur_n[cp]
            was = i_stim[i] != 0.0
            i_stim[i] += cur_di[cp]
            if i_stim[i] != 0.0:
                if not was:
                    stim_nonzero += 1
            elif was:
                stim_nonzero -= 1
            cp += 1

        if idle_ok and n_firing == 0 and stim_nonzero == 0:
            # idle fast path: all ports sit at their refractory levels, so
            # currents and plasticity overdrive are exactly zero
            if flag_ports and k % decim == 0:
                r = k // decim
                for i in range(n_neurons):
                    rec_port[r, i] = v_refr[i]
            for i in range(n_neurons):
                v[i] = v[i] + gain[i] * (v_refr[i] - v[i])
                if armed[i] == 0 and v[i] >= arm_level[i]:
                    armed[i] = 1
                if armed[i] == 1 and v[i] <= v_thr[i]:
                    mode[i] = 1
                    fire_k0[i] = k + 1
                    v[i] = v_refr[i]
                    armed[i] = 0
                    fires.append((i, k + 1))
                    n_firing += 1
        else:
            for i in range(n_neurons):
                if mode[i] == 1:
                    port[i] = tbl[tbl_off[i] + (k - fire_k0[i])]
                else:
                    port[i] = v_refr[i]
                i_sum[i] = 0.0
            if flag_ports and k % decim == 0:
                r = k // decim
                for i in range(n_neurons):
                    rec_port[r, i] = port[i]

            for m in range(n_syn):
                vp = port[pre[m]]
                vq = port[post[m]]
                i_sum[post[m]] += g[m] * (vp - vq)
                vnet = vq - vp
                up = vnet - v_tp[m]
                if up > 0.0:
                    up = eta_p[m] * up * dt
                else:
                    up = 0.0
                dn = -vnet - v_tm[m]
                if dn > 0.0:
                    dn = eta_d[m] * dn * dt
                else:
                    dn = 0.0
                gn = g[m] + up - dn
                if gn < g_min[m]:
                    gn = g_min[m]
                elif gn > g_max[m]:
                    gn = g_max[m]
                g[m] = gn

            for i in range(n_neurons):
                if mode[i] == 0:
                    i_tot = i_sum[i] + i_stim[i]
                    v_ss = v_refr[i] - i_tot * r_leaky[i]
                    v[i] = v[i] + gain[i] * (v_ss - v[i])
                    if armed[i] == 0 and v[i] >= arm_level[i]:
                        armed[i] = 1
                    if armed[i] == 1 and v[i] <= v_thr[i]:
                        mode[i] = 1
                        fire_k0[i] = k + 1
                        v[i] = v_refr[i]
                        armed[i] = 0
                        fires.append((i, k + 1))
                        n_firing += 1

        while fp < n_forced and forced_k[fp] == k + 1:
            i = forced_n[fp]
            if mode[i] == 0:
                mode[i] = 1
                fire_k0[i] = k + 1
                v[i] = v_refr[i]
                armed[i] = 0
                fires.append((i, k + 1))
                n_firing += 1
            fp += 1

        if n_firing > 0:
            for i in range(n_neurons):
                if mode[i] == 1 and k + 1 - fire_k0[i] >= n_spk[i]:
                    mode[i] = 0
                    v[i] = v_refr[i]
                    n_firing -= 1

        if (k + 1) % decim == 0:
            r = (k + 1) // decim
            if flag_state:
                for i in range(n_neurons):
                    rec_v[r, i] = v[i]
                    rec_mode[r, i] = <signed char> mode[i]
            if flag_g:
                for j in range(n_syn):
                    rec_g[r, j] = g[j]

    cs.cur_ptr = cp
    cs.forced_ptr = fp
    cs.k_next = n_steps
