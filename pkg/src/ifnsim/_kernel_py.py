"""NumPy fallback stepping kernel.

Implements exactly the same per-step update sequence as the compiled
kernel (``_kernel.pyx``), with the same floating-point operation order,
so the two backends produce bit-identical traces:

  0. apply injected-current segment starts/ends scheduled for this step
  1. resolve port voltages (spike table lookup for firing neurons)
  2. synapse currents from the pre-update conductances
  3. threshold-gated plasticity update, hard-clamped
  4. exponential-Euler membrane update for integrating neurons
     (firing neurons discard their input)
  5. comparator re-arm, threshold fire checks (ties in ascending neuron
     order), then forced fire onsets scheduled for the next step
  6. end firing phases whose spike duration has elapsed
  7. record the post-step state on the decimated grid

A neuron that begins firing during step k has onset time ``(k+1) * dt``
and starts driving in the following step, so a threshold crossing never
affects other neurons within the same step. A firing neuron's port
during a step carries the waveform sample at the *end* of that step
(right-edge sampling); with this convention halving dt shifts fire
times strictly less than one coarse step.

Steps where nothing fires, no stimulus current is active, and no synapse
spans differing refractory levels take an idle fast path: every port
equals its refractory level, so synapse currents and plasticity overdrive
are exactly zero and the port/synapse blocks can be skipped with
bit-identical results (membrane decay, fire checks, scheduled events, and
recording still run).
"""
from __future__ import annotations

import numpy as np

name = "numpy"
compiled = False


def advance(cs, n_steps: int, fires: list) -> None:
    """Advance ``cs`` in place up to (excluding) step ``n_steps``.

    Appends ``(neuron_index, onset_step)`` tuples to ``fires``.
    """
    dt = cs.dt
    decim = cs.decim
    v_refr = cs.v_refr
    v_thr = cs.v_thr
    arm_level = cs.arm_level
    gain = cs.gain
    r_leaky = cs.r_leaky
    n_spk = cs.n_spk
    n_spk_m1 = n_spk - 1
    tbl_off = cs.tbl_off
    tbl = cs.tbl
    pre = cs.pre
    post = cs.post
    g_min = cs.g_min
    g_max = cs.g_max
    v_tp = cs.v_tp
    v_tm = cs.v_tm
    eta_p = cs.eta_p
    eta_d = cs.eta_d
    mode = cs.mode
    armed = cs.armed
    v = cs.v
    fire_k0 = cs.fire_k0
    g = cs.g
    i_stim = cs.i_stim
    n_neurons = v.shape[0]

    cur_k = cs.cur_k
    cur_n = cs.cur_n
    cur_di = cs.cur_di
    forced_k = cs.forced_k
    forced_n = cs.forced_n
    cp = cs.cur_ptr
    fp = cs.forced_ptr

    n_firing = int((mode == 1).sum())
    stim_nonzero = int(np.count_nonzero(i_stim))
    idle_ok = bool(cs.idle_skip_ok)

    for k in range(cs.k_next, n_steps):
        while cp < cur_k.shape[0] and cur_k[cp] == k:
            i = cur_n[cp]
            was = i_stim[i] != 0.0
            i_stim[i] += cur_di[cp]
            stim_nonzero += int(i_stim[i] != 0.0) - int(was)
            cp += 1

        idle = idle_ok and n_firing == 0 and stim_nonzero == 0
        if idle:
            if cs.flag_ports and k % decim == 0:
                cs.rec_port[k // decim] = v_refr
            v += gain * (v_refr - v)
        else:
            firing = mode == 1
            idx = np.minimum(np.maximum(k - fire_k0, 0), n_spk_m1) + tbl_off
            port = np.where(firing, tbl[idx], v_refr)
            if cs.flag_ports and k % decim == 0:
                cs.rec_port[k // decim] = port

            if pre.shape[0]:
                vp = port[pre]
                vq = port[post]
                i_syn = g * (vp - vq)
                i_sum = np.bincount(post, weights=i_syn, minlength=n_neurons)
                vnet = vq - vp
                up = eta_p * np.maximum(vnet - v_tp, 0.0) * dt
                dn = eta_d * np.maximum(-vnet - v_tm, 0.0) * dt
                gn = g + up - dn
                np.clip(gn, g_min, g_max, out=gn)
                g[:] = gn
            else:
                i_sum = np.zeros(n_neurons)

            integ = ~firing
            i_tot = i_sum + i_stim
            v_ss = v_refr - i_tot * r_leaky
            v[integ] += (gain * (v_ss - v))[integ]

        can_arm = (mode == 0) & (armed == 0) & (v >= arm_level)
        armed[can_arm] = 1
        fire_mask = (mode == 0) & (armed == 1) & (v <= v_thr)
        if fire_mask.any():
            for i in np.nonzero(fire_mask)[0]:
                mode[i] = 1
                fire_k0[i] = k + 1
                v[i] = v_refr[i]
                armed[i] = 0
                fires.append((int(i), k + 1))
                n_firing += 1

        while fp < forced_k.shape[0] and forced_k[fp] == k + 1:
            i = forced_n[fp]
            if mode[i] == 0:
                mode[i] = 1
                fire_k0[i] = k + 1
                v[i] = v_refr[i]
                armed[i] = 0
                fires.append((int(i), k + 1))
                n_firing += 1
            fp += 1

        if n_firing:
            done = (mode == 1) & (k + 1 - fire_k0 >= n_spk)
            n_done = int(done.sum())
            if n_done:
                mode[done] = 0
                v[done] = v_refr[done]
                n_firing -= n_done

        if (k + 1) % decim == 0:
            r = (k + 1) // decim
            if cs.flag_state:
                cs.rec_v[r] = v
                cs.rec_mode[r] = mode
            if cs.flag_g:
                cs.rec_g[r] = g

    cs.cur_ptr = cp
    cs.forced_ptr = fp
    cs.k_next = n_steps
