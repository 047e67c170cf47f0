use super::ExperimentKind;

/// Equations exercised by an experiment kind, with background references.
pub fn explain(kind: ExperimentKind) -> String {
    let body = match kind {
        ExperimentKind::Phasematch => {
            "Energy and momentum conservation in down-conversion p -> s + i:\n\
             \x20 omega_p = omega_s + omega_i,  k_p = k_s + k_i,  |k| = n(omega) omega / c\n\
             Emission angles from the closed wavevector triangle (law of cosines):\n\
             \x20 cos(theta_ps) = (k_p^2 + k_s^2 - k_i^2) / (2 k_p k_s)\n\
             Coherence condition: Re n(omega_p) <= Re n(omega_s), Re n(omega_i).\n\
             References: A. Yariv, Quantum Electronics (Wiley, 1989)."
        }
        ExperimentKind::Twm => {
            "Coupled-mode equations for three-wave mixing with a strong pump:\n\
             \x20 dE_pw*/dz = i g E_c exp(i dk z),  dE_c/dz = -i g* E_pw* exp(-i dk z)\n\
             Conjugate-wave amplification factor after length L (E_c(0) = 0):\n\
             \x20 AF = -2i (g*/b) sinh(bL/2) exp(-i dk L/2),  b = sqrt(4|g|^2 - dk^2)\n\
             Invariant: |E_pw|^2 - |E_c|^2 is conserved along z.\n\
             References: A. Yariv, Appl. Phys. Lett. 28, 88 (1976);\n\
             D. M. Pepper and A. Yariv, in Optical Phase Conjugation (Academic Press, 1983)."
        }
        ExperimentKind::Mirror => {
            "Pumped spherical crystal acting as a frequency-converting mirror:\n\
             \x20 omega_s / Z_s + omega_i / Z_i = (omega_p / R) cos(beta)\n\
             \x20 M = -(Z_i omega_s) / (Z_s omega_i)\n\
             Transverse momentum at the exit face: omega_s sin(beta_ps) = omega_i sin(beta_pi).\n\
             Paraxial form: (lambda_p/lambda_s)/Z_s + (lambda_p/lambda_i)/Z_i = 1/(f - d).\n\
             References: T. B. Pittman et al., Phys. Rev. A 53, 2804 (1996)."
        }
        ExperimentKind::Diffract => {
            "Far-field slit pattern:\n\
             \x20 R(x2)/R(0) = [sin X / X]^2,  X = pi a x2 / (lambda z2)\n\
             Double slit with coherence gamma:\n\
             \x20 I(x2) = sinc^2(X) (1 + gamma cos(2 pi d x2 / (lambda z2))) / (1 + gamma)\n\
             Visibility V = (Imax - Imin) / (Imax + Imin).\n\
             References: M. Born and E. Wolf, Principles of Optics."
        }
        ExperimentKind::GhostImage => {
            "Two-photon imaging in the unfolded picture: the crystal retro-reflects the\n\
             signal path into the idler arm, so mask and D2 obey the thin-lens law\n\
             \x20 1/S + 1/S' = 1/f,  M = -S'/S\n\
             with S' measured from the lens back through the crystal to D2.\n\
             Coincidences show the image; singles at D1 and D2 stay flat.\n\
             References: T. B. Pittman et al., Phys. Rev. A 52, R3429 (1995);\n\
             D. N. Klyshko, Phys. Lett. A 132, 299 (1988)."
        }
        ExperimentKind::GhostDiffract => {
            "Two-photon diffraction: a slit in the signal arm, D2 scanning the idler arm.\n\
             \x20 R_c(x2)/R_c(0) = [sin X / X]^2,  X = pi a x2 / (lambda z2)\n\
             with z2 the slit-to-crystal plus crystal-to-D2 distance.\n\
             References: D. V. Strekalov et al., Phys. Rev. Lett. 74, 3600 (1995);\n\
             D. N. Klyshko, Sov. Phys. Usp. 31, 74 (1988)."
        }
        ExperimentKind::DirectQm => {
            "Direct spherical-mirror imaging of an independently lit object:\n\
             \x20 omega_s / Z_s + omega_i / Z_i = omega_p / R,  M = -(Z_i omega_s) / (Z_s omega_i)\n\
             The image plane is found by minimising the RMS spot of an axial point;\n\
             the run is repeated with and without coincidence gating.\n\
             References: T. B. Pittman et al., Phys. Rev. A 53, 2804 (1996)."
        }
    };
    format!("{}\n\n{}\n", kind.name(), body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_is_explained() {
        for k in ExperimentKind::ALL {
            let text = explain(k);
            assert!(text.starts_with(k.name()));
            assert!(text.contains("References"));
        }
    }
}
