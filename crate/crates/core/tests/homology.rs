use num_bigint::BigInt;
use proptest::prelude::*;

use conley_core::homology::{homology, relative_homology, smith_normal_form, CubicalComplex, IntMatrix};

/// Exact determinant by fraction-free elimination.
fn bareiss(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    let (mut sign, mut prev) = (1, 1i128);
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(i) = (k + 1..n).find(|&i| a[i][k] != 0) else { return 0 };
            a.swap(k, i);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (k - 1..n).flat_map(|last| combinations(last, k - 1).into_iter().map(move |mut c| {
        c.push(last);
        c
    })).collect()
}

/// `d_k = D_k / D_(k-1)` with `D_k` the gcd of the `k x k` minors.
fn determinantal(m: &[Vec<i64>]) -> Vec<BigInt> {
    let (r, c) = (m.len(), m[0].len());
    let mut out = Vec::new();
    let mut prev = 1i128;
    for k in 1..=r.min(c) {
        let mut g = 0;
        for rs in combinations(r, k) {
            for cs in combinations(c, k) {
                g = gcd(g, bareiss(rs.iter().map(|&i| cs.iter().map(|&j| i128::from(m[i][j])).collect()).collect()));
            }
        }
        if g == 0 {
            break;
        }
        out.push(BigInt::from(g / prev));
        prev = g;
    }
    out
}

fn matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-6i64..=6, c), r))
}

fn complex(dim: usize) -> impl Strategy<Value = CubicalComplex> {
    prop::collection::vec(prop::collection::vec(0u32..4, dim), 1..30).prop_map(move |c| CubicalComplex::from_cubes(dim, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn snf_matches_determinantal_divisors(m in matrix()) {
        let s = smith_normal_form(&IntMatrix::from_i64(&m));
        let want = determinantal(&m);
        prop_assert_eq!(s.rank, want.len());
        prop_assert_eq!(s.invariant_factors, want);
    }

    #[test]
    fn snf_invariant_under_unimodular_moves(m in matrix(), moves in prop::collection::vec((0usize..6, 0usize..6, -3i64..=3, any::<bool>()), 0..12)) {
        let mut n = m.clone();
        let (r, c) = (n.len(), n[0].len());
        for (a, b, f, rows) in moves {
            if rows && a % r != b % r {
                let (a, b) = (a % r, b % r);
                for j in 0..c { n[a][j] += f * n[b][j]; }
            } else if !rows && a % c != b % c {
                let (a, b) = (a % c, b % c);
                for row in n.iter_mut() { row[a] += f * row[b]; }
            }
        }
        prop_assert_eq!(smith_normal_form(&IntMatrix::from_i64(&m)), smith_normal_form(&IntMatrix::from_i64(&n)));
    }

    #[test]
    fn boundary_squares_to_zero_and_euler_holds(x in complex(3)) {
        prop_assert!(x.boundary_squared_is_zero());
        prop_assert_eq!(homology(&x).unwrap().euler_characteristic(), x.euler_characteristic());
    }

    #[test]
    fn relative_homology_of_a_pair(x in complex(2), keep in prop::collection::vec(any::<bool>(), 30)) {
        // a subcomplex built from some of the same cubes
        let cubes: Vec<Vec<u32>> = x.cells(2).iter().zip(&keep).filter(|(_, k)| **k).map(|(c, _)| conley_core::homology::complex::unpack(*c, 2).iter().map(|v| v / 2).collect()).collect();
        let a = CubicalComplex::from_cubes(2, cubes).unwrap();
        prop_assert!(a.is_subcomplex_of(&x));
        let h = relative_homology(&x, &a).unwrap();
        prop_assert_eq!(h.euler_characteristic(), x.euler_characteristic() - a.euler_characteristic());
        prop_assert!(relative_homology(&x, &x).unwrap().is_trivial());
    }
}

fn square_block(n: u32) -> Vec<Vec<u32>> {
    (0..n).flat_map(|i| (0..n).map(move |j| vec![i, j])).collect()
}

#[test]
fn figure_eight() {
    let cubes: Vec<Vec<u32>> = (0..3).flat_map(|i| (0..5).map(move |j| vec![i, j])).filter(|c| !(c[0] == 1 && c[1] % 2 == 1)).collect();
    let h = homology(&CubicalComplex::from_cubes(2, cubes).unwrap()).unwrap();
    assert_eq!(&h.betti[..2], &[1, 2]);
}

#[test]
fn saddle_index_pair() {
    let n = CubicalComplex::from_cubes(2, square_block(3)).unwrap();
    let e = CubicalComplex::from_cubes(2, (0..3).flat_map(|j| [vec![0, j], vec![2, j]])).unwrap();
    assert_eq!(&relative_homology(&n, &e).unwrap().betti[..2], &[0, 1]);
}

#[test]
fn hollow_cube_is_a_sphere() {
    let cubes: Vec<Vec<u32>> = (0..3).flat_map(|i| (0..3).flat_map(move |j| (0..3).map(move |k| vec![i, j, k]))).filter(|c| c != &[1, 1, 1]).collect();
    let h = homology(&CubicalComplex::from_cubes(3, cubes).unwrap()).unwrap();
    assert_eq!(h.betti, vec![1, 0, 1, 0]);
}
