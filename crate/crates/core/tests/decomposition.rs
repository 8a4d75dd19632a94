//! Cross checks of the retardation/adiabatic-correction decomposition and
//! the C₆-neglect bound on the tabulated turning points.

use hedimer::constants::PhysicalConstants;
use hedimer::exec::ExecMode;
use hedimer::spectra::{
    c6_bound, compute_levels, epsilon_rad, epsilon_ret, SpectrumFlags, Well,
};

#[test]
fn decomposition_is_consistent_to_second_order() {
    // E(all on) − εret − εrad equals E(both off) within 0.05 MHz: the two
    // corrections interact only at second order.
    let c = PhysicalConstants::default();
    let mode = ExecMode::auto();
    let on = SpectrumFlags { retarded: true, radial_correction: true };
    let off = SpectrumFlags { retarded: false, radial_correction: false };
    let full = compute_levels(Well::ZeroUPlus, 1, on, &c, mode).unwrap();
    let bare = compute_levels(Well::ZeroUPlus, 1, off, &c, mode).unwrap();
    let ret = epsilon_ret(Well::ZeroUPlus, 1, on, &c, mode).unwrap();
    let rad = epsilon_rad(Well::ZeroUPlus, 1, on, &c, mode).unwrap();
    assert_eq!(full.len(), 6);
    assert_eq!(bare.len(), 6);
    for (((f, b), (_, er)), (_, ea)) in full.iter().zip(bare.iter()).zip(ret.iter()).zip(rad.iter())
    {
        let reconstructed = f.energy_mhz - er - ea;
        assert!(
            (reconstructed - b.energy_mhz).abs() <= 0.05,
            "v = {}: {} vs {} MHz",
            f.v,
            reconstructed,
            b.energy_mhz
        );
    }
}

#[test]
fn self_difference_is_exactly_zero() {
    // With retardation already off, toggling it is a no-op and the
    // decomposition entry is identically zero.
    let c = PhysicalConstants::default();
    let flags = SpectrumFlags { retarded: false, radial_correction: true };
    let ret = epsilon_ret(Well::ZeroUPlus, 1, flags, &c, ExecMode::auto()).unwrap();
    assert!(ret.iter().all(|(_, e)| *e == 0.0));
}

#[test]
fn tabulated_inner_turning_points_pass_the_c6_bound() {
    // Inner turning points of every tabulated level (bohr).
    let c = PhysicalConstants::default();
    let r_mins = [
        162.5, 152.9, 149.5, 148.1, 147.7, 147.6, // 0u+ J=1
        461.7, // 0u- J=2
        351.1, 329.3, 322.5, 320.5, // 2u J=2
    ];
    let report = c6_bound(&c, &r_mins).unwrap();
    for entry in &report {
        assert!(
            !entry.violates,
            "C6/R6 exceeds the bound at R = {} (ratio {:.2e})",
            entry.r_a0, entry.ratio
        );
    }
}
