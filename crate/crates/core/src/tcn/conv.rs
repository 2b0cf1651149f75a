//! Dilated 1D convolution kernels with edge-replication padding.
//!
//! Tensors are flat and channel-major: `x[c * t_len + t]`. Padding clamps
//! out-of-range frame reads to the sequence boundary, so the output always
//! has the input length, for any kernel size, dilation, and `T >= 1`.

/// Clamped source frame for output frame `t`, tap `i` of `k`, at `dilation`.
#[inline]
fn source_frame(t: usize, i: usize, k: usize, dilation: usize, t_len: usize) -> usize {
    let half = (k as isize - 1) / 2;
    let src = t as isize + (i as isize - half) * dilation as isize;
    src.clamp(0, t_len as isize - 1) as usize
}

/// Forward convolution. `w` is `[c_out x c_in x k]` row-major, `bias` is
/// `[c_out]`; returns `[c_out x t_len]`.
pub fn forward(
    x: &[f64],
    c_in: usize,
    t_len: usize,
    w: &[f64],
    bias: &[f64],
    c_out: usize,
    k: usize,
    dilation: usize,
) -> Vec<f64> {
    debug_assert_eq!(x.len(), c_in * t_len);
    debug_assert_eq!(w.len(), c_out * c_in * k);
    debug_assert_eq!(bias.len(), c_out);

    let mut out = vec![0.0; c_out * t_len];
    for co in 0..c_out {
        let out_row = &mut out[co * t_len..(co + 1) * t_len];
        out_row.fill(bias[co]);
        for ci in 0..c_in {
            let w_row = &w[(co * c_in + ci) * k..(co * c_in + ci + 1) * k];
            let x_row = &x[ci * t_len..(ci + 1) * t_len];
            for (i, &wv) in w_row.iter().enumerate() {
                for t in 0..t_len {
                    out_row[t] += wv * x_row[source_frame(t, i, k, dilation, t_len)];
                }
            }
        }
    }
    out
}

/// Backward convolution: given `dz` (gradient of the loss with respect to
/// the pre-activation output, `[c_out x t_len]`), returns gradients for the
/// weights, the bias, and the input. Replicated boundary reads accumulate
/// their gradient at the clamped frame.
pub fn backward(
    x: &[f64],
    c_in: usize,
    t_len: usize,
    w: &[f64],
    c_out: usize,
    k: usize,
    dilation: usize,
    dz: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    debug_assert_eq!(dz.len(), c_out * t_len);

    let mut dw = vec![0.0; c_out * c_in * k];
    let mut db = vec![0.0; c_out];
    let mut dx = vec![0.0; c_in * t_len];
    for co in 0..c_out {
        let dz_row = &dz[co * t_len..(co + 1) * t_len];
        db[co] += dz_row.iter().sum::<f64>();
        for ci in 0..c_in {
            let x_row = &x[ci * t_len..(ci + 1) * t_len];
            let dx_row = &mut dx[ci * t_len..(ci + 1) * t_len];
            let w_base = (co * c_in + ci) * k;
            for i in 0..k {
                let wv = w[w_base + i];
                let mut dwi = 0.0;
                for t in 0..t_len {
                    let src = source_frame(t, i, k, dilation, t_len);
                    dwi += dz_row[t] * x_row[src];
                    dx_row[src] += wv * dz_row[t];
                }
                dw[w_base + i] += dwi;
            }
        }
    }
    (dw, db, dx)
}
