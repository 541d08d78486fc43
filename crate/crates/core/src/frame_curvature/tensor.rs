//! Pointwise algebra on rank-4 curvature-type tensors in four dimensions.

use nalgebra::{Matrix3, Matrix4};

/// `t[a][b][c][d]`.
pub type Rank4 = [[[[f64; 4]; 4]; 4]; 4];
/// `t[a][b][c]`.
pub type Rank3 = [[[f64; 4]; 4]; 4];

pub fn zero4() -> Rank4 {
    [[[[0.0; 4]; 4]; 4]; 4]
}

pub fn zero3() -> Rank3 {
    [[[0.0; 4]; 4]; 4]
}

/// Lower the first index: R_abcd = g_ae R^e_bcd.
pub fn lower_first(r: &Rank4, g: &Matrix4<f64>) -> Rank4 {
    let mut out = zero4();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut s = 0.0;
                    for e in 0..4 {
                        s += g[(a, e)] * r[e][b][c][d];
                    }
                    out[a][b][c][d] = s;
                }
            }
        }
    }
    out
}

/// Raise the first index with the inverse metric.
pub fn raise_first(r: &Rank4, ginv: &Matrix4<f64>) -> Rank4 {
    lower_first(r, ginv)
}

/// Ricci R_bd = R^a_bad from a (1,3) tensor.
pub fn ricci(r: &Rank4) -> Matrix4<f64> {
    let mut out = Matrix4::zeros();
    for b in 0..4 {
        for d in 0..4 {
            let mut s = 0.0;
            for a in 0..4 {
                s += r[a][b][a][d];
            }
            out[(b, d)] = s;
        }
    }
    out
}

pub fn scalar(ric: &Matrix4<f64>, ginv: &Matrix4<f64>) -> f64 {
    (ginv * ric).trace()
}

/// Weyl tensor, all indices down, from R_abcd (all down).
pub fn weyl_lowered(rl: &Rank4, g: &Matrix4<f64>, ric: &Matrix4<f64>, s: f64) -> Rank4 {
    let mut w = zero4();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let kn = g[(a, c)] * ric[(b, d)] - g[(a, d)] * ric[(b, c)]
                        - g[(b, c)] * ric[(a, d)]
                        + g[(b, d)] * ric[(a, c)];
                    let gg = g[(a, c)] * g[(b, d)] - g[(a, d)] * g[(b, c)];
                    w[a][b][c][d] = rl[a][b][c][d] - 0.5 * kn + s / 6.0 * gg;
                }
            }
        }
    }
    w
}

/// Change basis of an all-lower tensor: out_ABCD = t_abcd E_A^a E_B^b E_C^c E_D^d,
/// with frame vectors stored as columns of `e` (e[(a, A)] = E_A^a).
pub fn to_frame(t: &Rank4, e: &Matrix4<f64>) -> Rank4 {
    let mut s1 = zero4();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for dd in 0..4 {
                    let mut s = 0.0;
                    for d in 0..4 {
                        s += t[a][b][c][d] * e[(d, dd)];
                    }
                    s1[a][b][c][dd] = s;
                }
            }
        }
    }
    let mut s2 = zero4();
    for a in 0..4 {
        for b in 0..4 {
            for cc in 0..4 {
                for dd in 0..4 {
                    let mut s = 0.0;
                    for c in 0..4 {
                        s += s1[a][b][c][dd] * e[(c, cc)];
                    }
                    s2[a][b][cc][dd] = s;
                }
            }
        }
    }
    let mut s3 = zero4();
    for a in 0..4 {
        for bb in 0..4 {
            for cc in 0..4 {
                for dd in 0..4 {
                    let mut s = 0.0;
                    for b in 0..4 {
                        s += s2[a][b][cc][dd] * e[(b, bb)];
                    }
                    s3[a][bb][cc][dd] = s;
                }
            }
        }
    }
    let mut out = zero4();
    for aa in 0..4 {
        for bb in 0..4 {
            for cc in 0..4 {
                for dd in 0..4 {
                    let mut s = 0.0;
                    for a in 0..4 {
                        s += s3[a][bb][cc][dd] * e[(a, aa)];
                    }
                    out[aa][bb][cc][dd] = s;
                }
            }
        }
    }
    out
}

/// Orthonormal basis of Λ^s (s = ±1) as antisymmetric 4×4 matrices:
/// (e⁰∧e^I + s e^j∧e^k)/√2 for cyclic (I, j, k).
pub fn lambda_basis(s: f64) -> [Matrix4<f64>; 3] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = [Matrix4::zeros(); 3];
    for i in 0..3 {
        let a = i + 1;
        let j = (i + 1) % 3 + 1;
        let k = (i + 2) % 3 + 1;
        let m = &mut out[i];
        m[(0, a)] = r;
        m[(a, 0)] = -r;
        m[(j, k)] = s * r;
        m[(k, j)] = -s * r;
    }
    out
}

/// Block of an orthonormal-frame curvature operator on Λ^s:
/// M_IJ = ⟨ω_I, R ω_J⟩ with (Rω)_ab = ½ R_abcd ω^cd and ⟨α,β⟩ = ½ α_ab β^ab.
pub fn lambda_block(t: &Rank4, s: f64) -> Matrix3<f64> {
    let om = lambda_basis(s);
    let mut m = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    let x = om[i][(a, b)];
                    if x == 0.0 {
                        continue;
                    }
                    for c in 0..4 {
                        for d in 0..4 {
                            let y = om[j][(c, d)];
                            if y != 0.0 {
                                acc += x * t[a][b][c][d] * y;
                            }
                        }
                    }
                }
            }
            m[(i, j)] = 0.25 * acc;
        }
    }
    m
}

/// Antisymmetry and first-Bianchi residuals of an all-lower tensor.
pub fn symmetry_residuals(rl: &Rank4) -> (f64, f64) {
    let mut anti: f64 = 0.0;
    let mut bianchi: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    anti = anti.max((rl[a][b][c][d] + rl[a][b][d][c]).abs());
                    bianchi = bianchi
                        .max((rl[a][b][c][d] + rl[a][c][d][b] + rl[a][d][b][c]).abs());
                }
            }
        }
    }
    (anti, bianchi)
}

/// Max |g^ac W_abcd| over (b, d).
pub fn trace_residual(wl: &Rank4, ginv: &Matrix4<f64>) -> f64 {
    let mut m: f64 = 0.0;
    for b in 0..4 {
        for d in 0..4 {
            let mut s = 0.0;
            for a in 0..4 {
                for c in 0..4 {
                    s += ginv[(a, c)] * wl[a][b][c][d];
                }
            }
            m = m.max(s.abs());
        }
    }
    m
}

/// Frobenius norm of a tensor given in an orthonormal frame.
pub fn frame_norm(t: &Rank4) -> f64 {
    let mut s = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    s += t[a][b][c][d] * t[a][b][c][d];
                }
            }
        }
    }
    s.sqrt()
}

/// Constant-curvature model R_abcd = k (δ_ac δ_bd − δ_ad δ_bc).
pub fn constant_curvature(k: f64) -> Rank4 {
    let mut r = zero4();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let dac = (a == c) as i32 as f64;
                    let dbd = (b == d) as i32 as f64;
                    let dad = (a == d) as i32 as f64;
                    let dbc = (b == c) as i32 as f64;
                    r[a][b][c][d] = k * (dac * dbd - dad * dbc);
                }
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_curvature_acts_as_identity_on_two_forms() {
        let r = constant_curvature(1.0);
        for s in [1.0, -1.0] {
            let m = lambda_block(&r, s);
            assert!((m - Matrix3::identity()).norm() < 1e-14);
        }
        let id = Matrix4::<f64>::identity();
        let ric = ricci(&r);
        assert!((ric - 3.0 * id).norm() < 1e-14);
        let w = weyl_lowered(&r, &id, &ric, scalar(&ric, &id));
        assert!(frame_norm(&w) < 1e-14);
    }

    #[test]
    fn basis_is_orthonormal_and_dual() {
        for s in [1.0, -1.0] {
            let b = lambda_basis(s);
            for i in 0..3 {
                for j in 0..3 {
                    let ip: f64 = 0.5 * b[i].component_mul(&b[j]).sum();
                    assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
            let o = lambda_basis(-s);
            for i in 0..3 {
                for j in 0..3 {
                    assert!(b[i].component_mul(&o[j]).sum().abs() < 1e-14_f64);
                }
            }
        }
    }
}
