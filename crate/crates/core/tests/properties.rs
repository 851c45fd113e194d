mod common;

use common::{arikan_rows, poly, q_rows, reference, rows_as_strings};
use cvpk_core::kernels::{self, PI_16};
use cvpk_core::oracle::{gpb_oracle, pb_oracle};
use cvpk_core::pb::{partial_distances, pb_cvpk_pair};
use cvpk_core::{OracleOptions, Pb};

fn assert_matches_reference(p: &Pb, rows: &[Vec<u8>]) {
    let r = reference(rows);
    for (phi, q) in p.polys().iter().enumerate() {
        assert_eq!(*q, poly(&r.pb[phi]), "phase {phi}");
    }
}

#[test]
fn arikan_enumeration_matches_reference() {
    let opts = OracleOptions::default();
    for m in 1..=4 {
        let k = kernels::arikan_power(m).unwrap();
        assert_eq!(k.row_strings(), rows_as_strings(&arikan_rows(1 << m)));
        assert_matches_reference(&pb_oracle(&k, &opts).unwrap(), &arikan_rows(1 << m));
    }
}

#[test]
fn sorted_kernel_matches_reference() {
    let q = q_rows(16);
    let rows: Vec<Vec<u8>> = PI_16.iter().map(|&i| q[i].clone()).collect();
    let k = kernels::sorted_cvpk(16).unwrap();
    assert_eq!(k.row_strings(), rows_as_strings(&rows));
    let p = pb_oracle(&k, &OracleOptions::default()).unwrap();
    assert_matches_reference(&p, &rows);
    let plain = partial_distances(&pb_cvpk_pair(4).unwrap().0).unwrap();
    let sorted = partial_distances(&p).unwrap();
    assert_eq!(sorted.rate, plain.rate);
    let r = reference(&rows);
    let least: Vec<usize> = r.pb.iter().map(|c| c.iter().position(|&x| x > 0).unwrap()).collect();
    assert_eq!(sorted.d, least);
}

#[test]
fn gpb_enumeration_of_swapped_kernel_is_consistent() {
    // the swapped kernel's own GPB must still partition all configurations
    let g = gpb_oracle(&kernels::swapped_cvpk(16).unwrap(), &OracleOptions::default()).unwrap();
    assert!(g.boxes_conserved());
}

#[test]
fn swapped_pairs_trade_coefficients() {
    for m in [4, 5, 6] {
        let n = 1usize << m;
        let (plain, swapped) = pb_cvpk_pair(m).unwrap();
        let d = partial_distances(&plain).unwrap().d;
        let mut checked = 0;
        for i in 2..n / 2 - 2 {
            let (a, b) = (2 * i, 2 * i + 1);
            if d[a] != d[b] {
                continue;
            }
            let w = d[a];
            assert!(swapped.poly(b).coeff(w) <= plain.poly(a).coeff(w), "n = {n}, i = {i}");
            assert!(plain.poly(b).coeff(w) <= swapped.poly(a).coeff(w), "n = {n}, i = {i}");
            checked += 1;
        }
        assert!(checked > 0 || n == 16, "n = {n}: no equal-distance pairs");
    }
}

#[test]
fn swap_leaves_outer_phases_alone() {
    let (plain, swapped) = pb_cvpk_pair(6).unwrap();
    for phi in (0..4).chain(60..64) {
        assert_eq!(plain.poly(phi), swapped.poly(phi));
    }
}
