use bohrlab_core::bogolyubov::{bogolyubov_search, ruzsa_bogolyubov_abelian, BogoCriteria, EpsFn};
use bohrlab_core::bohr::{bohr_set, exponent_collapse, u_to_t_abelian, verify_bohr_basic, BohrSpec};
use bohrlab_core::group::{build_group, GroupDescriptor, Subset};
use bohrlab_core::homs::{defect, discretize, kazhdan_correct, CorrectionConfig, GroupMap, DEFAULT_HOM_TOL};
use bohrlab_core::linalg::{gamma, UnitaryMatrix};
use bohrlab_core::nets::{su2_net, torus_net};
use bohrlab_core::reps::catalog_irreps;
use proptest::prelude::*;

#[test]
fn perturbed_z4_defect() {
    let g = build_group(&GroupDescriptor::Cyclic { n: 4 }).unwrap();
    let f = GroupMap::from_fn(&g, |x| {
        let t = std::f64::consts::FRAC_PI_2 * x as f64 + if x == 1 { 0.1 } else { 0.0 };
        UnitaryMatrix::from_phases(&[t])
    })
    .unwrap();
    let d = defect(&f);
    assert!((d.defect - 2.0 * 0.1f64.sin()).abs() < 1e-12);
    assert_eq!(d.witness, (1, 1));
}

#[test]
fn spin_rep_through_every_stage() {
    let g = build_group(&GroupDescriptor::Quaternion8).unwrap();
    let spin = catalog_irreps(&g).unwrap().into_iter().find(|r| r.name() == "spin").unwrap();
    let net = su2_net(0.4, 3).unwrap();
    let d = discretize(spin.map(), &net, DEFAULT_HOM_TOL).unwrap();
    assert!(d.sup_distance <= 0.4);
    let r = kazhdan_correct(&d.map, &CorrectionConfig { eps_k: 1.0, ..CorrectionConfig::default() }).unwrap();
    assert!(r.final_defect <= DEFAULT_HOM_TOL);
    let b = bohr_set(&BohrSpec::from_rep(&spin, gamma(4)).unwrap());
    assert!(verify_bohr_basic(&b).all_pass());
    assert_eq!(exponent_collapse(&b).unwrap().subgroup, vec![0]);
}

#[test]
fn search_on_z8_finds_the_subgroup() {
    let g = build_group(&GroupDescriptor::Cyclic { n: 8 }).unwrap();
    let a = Subset::new(&g, [0, 4]).unwrap();
    let criteria = BogoCriteria { alpha: 0.25, eps: EpsFn::Constant { value: 0.1 } };
    let report = bogolyubov_search(&a, &criteria, &catalog_irreps(&g).unwrap(), &[1.0]).unwrap();
    assert_eq!(report.witness.unwrap().bohr.members().members(), &[0, 4]);
}

#[test]
fn torus_reduction_keeps_members() {
    let g = build_group(&GroupDescriptor::Cyclic { n: 6 }).unwrap();
    let rep = catalog_irreps(&g).unwrap().into_iter().nth(1).unwrap();
    let b = bohr_set(&BohrSpec::from_rep(&rep, 1.2).unwrap());
    let t = u_to_t_abelian(&b).unwrap();
    assert_eq!(t.bohr.members(), b.members());
    let net = torus_net(1, 0.6).unwrap();
    assert!(net.certified_radius <= 0.6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ruzsa_on_products_of_cyclics(mask in 1u32..(1 << 12)) {
        let g = build_group(&GroupDescriptor::Product {
            factors: vec![GroupDescriptor::Cyclic { n: 3 }, GroupDescriptor::Cyclic { n: 4 }],
        })
        .unwrap();
        let a = Subset::new(&g, (0..12).filter(|i| mask >> i & 1 == 1)).unwrap();
        let w = ruzsa_bogolyubov_abelian(&a).unwrap();
        let aa = a.difference_set();
        prop_assert!(w.bohr.members().is_subset_of(&aa.product(&aa).unwrap()));
        prop_assert!(w.large_spectrum.len() as f64 <= 2.0 / (w.alpha * w.alpha) + 1e-9);
    }
}
