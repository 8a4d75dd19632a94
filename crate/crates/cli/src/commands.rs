use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use hedimer::basis::{block, hund_a_decomposition, Parity, Reflection, SymmetryBlock};
use hedimer::constants::PhysicalConstants;
use hedimer::error::{Error, Result};
use hedimer::exec::ExecMode;
use hedimer::lineshift::{
    binding_energy, lorentzian_fit, shift_budget, thermal_average_mc, Measurement,
};
use hedimer::potentials::{
    adiabatic_curves, default_r_grid, uniform_r_grid, BlockHamiltonian, HamiltonianFlags,
};
use hedimer::radial::BoundLevel;
use hedimer::spectra::{
    c6_bound, compute_levels, compute_spectrum, fit_c3, SpectrumFlags, Well,
};

use crate::io::{self, fmt_a0, fmt_mhz, ReduceInput};
use crate::{Cli, Command, OutputFormat};

pub fn run(cli: Cli) -> Result<()> {
    let constants = load_constants(cli.constants.as_deref())?;
    let report = match cli.command {
        Command::Curves(args) => curves(&args, &constants)?,
        Command::Spectrum(args) => spectrum(&args, &constants)?,
        Command::Table1(args) => table1(&args, &constants)?,
        Command::FitGamma(args) => fit_gamma(&args, &constants)?,
        Command::Reduce(args) => reduce(&args, &constants)?,
        Command::Budget(args) => budget(&args, &constants)?,
        Command::Basis(args) => basis_dump(&args)?,
    };
    write_output(&report, cli.out.as_deref())
}

fn load_constants(path: Option<&Path>) -> Result<PhysicalConstants> {
    match path {
        None => Ok(PhysicalConstants::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Usage(format!("cannot read {}: {e}", p.display())))?;
            PhysicalConstants::from_json(&text)
        }
    }
}

fn write_output(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::Usage(format!("cannot write {}: {e}", p.display()))),
    }
}

fn parse_block(name: &str) -> Result<SymmetryBlock> {
    match name {
        "0u+" => block(Parity::Ungerade, 0, Some(Reflection::Plus)),
        "0u-" => block(Parity::Ungerade, 0, Some(Reflection::Minus)),
        "1u" => block(Parity::Ungerade, 1, None),
        "2u" => block(Parity::Ungerade, 2, None),
        "3u" => block(Parity::Ungerade, 3, None),
        other => Err(Error::Usage(format!(
            "unknown block '{other}'; expected one of 0u+, 0u-, 1u, 2u, 3u"
        ))),
    }
}

fn default_j_for_omega(omega: u32) -> u32 {
    match omega {
        0 => 1,
        o => o,
    }
}

fn parse_well_and_j(well: &str, j: Option<u32>) -> Result<(Well, u32)> {
    let well = Well::parse(well)?;
    let j = j.unwrap_or_else(|| well.default_j());
    well.check_j(j)?;
    Ok((well, j))
}

// ---------------------------------------------------------------------------
// curves
// ---------------------------------------------------------------------------

fn curves(args: &crate::CurvesArgs, constants: &PhysicalConstants) -> Result<String> {
    let blk = parse_block(&args.block)?;
    let j = args.j.unwrap_or_else(|| default_j_for_omega(blk.omega));
    let flags = HamiltonianFlags {
        retarded: !args.no_retardation,
        rotation: !args.fixed_nuclei,
    };
    let grid = match (args.r_min, args.r_max, args.step) {
        (None, None, None) => default_r_grid(),
        (rmin, rmax, step) => {
            let r_min = rmin.unwrap_or(100.0);
            let r_max = rmax.unwrap_or(20_000.0);
            let step = step.unwrap_or(0.5);
            if !(r_min > 0.0 && r_max > r_min && step > 0.0) {
                return Err(Error::Usage(format!(
                    "grid override needs 0 < r-min < r-max and step > 0, \
                     got ({r_min}, {r_max}, {step})"
                )));
            }
            let n = ((r_max - r_min) / step).round() as usize + 1;
            uniform_r_grid(r_min, r_max, n)
        }
    };
    let bh = BlockHamiltonian::new(blk, constants);
    let curves = adiabatic_curves(&bh, j, &grid, flags, ExecMode::auto())?;

    // Deduplicated label list defines the weight columns.
    let mut labels = Vec::new();
    for l in &bh.block.labels {
        if !labels.contains(l) {
            labels.push(*l);
        }
    }

    match args.format {
        OutputFormat::Json => {
            let curves_json: Vec<_> = curves
                .iter()
                .map(|c| {
                    let rows: Vec<_> = c
                        .r_grid
                        .iter()
                        .enumerate()
                        .map(|(i, r)| {
                            let w = hund_a_decomposition(&bh.block, &c.eigenvectors[i]);
                            json!({
                                "r_a0": r,
                                "v_mhz": hedimer::constants::au_to_mhz(c.values[i]),
                                "g_per_a0sq": c.radial_correction[i],
                                "weights": w.iter()
                                    .map(|(l, x)| (l.to_string(), json!(x)))
                                    .collect::<serde_json::Map<String, serde_json::Value>>(),
                            })
                        })
                        .collect();
                    json!({
                        "curve_index": c.curve_index,
                        "asymptote_j": c.asymptote_j,
                        "well_depth_ghz": hedimer::constants::au_to_ghz(c.well_depth_au()),
                        "rows": rows,
                    })
                })
                .collect();
            let doc = json!({
                "block": bh.block.name(),
                "j": j,
                "flags": { "retarded": flags.retarded, "rotation": flags.rotation },
                "curves": curves_json,
            });
            Ok(format!("{:#}\n", doc))
        }
        OutputFormat::Csv => {
            let mut out = String::new();
            writeln!(out, "# block: {}", bh.block.name()).unwrap();
            writeln!(out, "# j: {j}").unwrap();
            writeln!(
                out,
                "# flags: retarded={} rotation={}",
                flags.retarded, flags.rotation
            )
            .unwrap();
            for c in &curves {
                writeln!(
                    out,
                    "# curve {}: asymptote P{}  well_depth_ghz={:.6}",
                    c.curve_index,
                    c.asymptote_j,
                    hedimer::constants::au_to_ghz(c.well_depth_au())
                )
                .unwrap();
            }
            let weight_cols: Vec<String> =
                labels.iter().map(|l| format!("w_{l}")).collect();
            writeln!(out, "curve,R_a0,V_MHz,g_per_a0sq,{}", weight_cols.join(",")).unwrap();
            for c in &curves {
                for (i, r) in c.r_grid.iter().enumerate() {
                    let w = hund_a_decomposition(&bh.block, &c.eigenvectors[i]);
                    let weights: Vec<String> = labels
                        .iter()
                        .map(|l| {
                            let x = w
                                .iter()
                                .find(|(wl, _)| wl == l)
                                .map(|(_, x)| *x)
                                .unwrap_or(0.0);
                            format!("{x:.6}")
                        })
                        .collect();
                    writeln!(
                        out,
                        "{},{:.4},{:.6},{:.6e},{}",
                        c.curve_index,
                        r,
                        hedimer::constants::au_to_mhz(c.values[i]),
                        c.radial_correction[i],
                        weights.join(",")
                    )
                    .unwrap();
                }
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// spectrum / table1
// ---------------------------------------------------------------------------

fn spectrum(args: &crate::SpectrumArgs, constants: &PhysicalConstants) -> Result<String> {
    let (well, j) = parse_well_and_j(&args.well, args.j)?;
    let flags = SpectrumFlags {
        retarded: !args.no_retardation,
        radial_correction: !args.no_radial_correction,
    };
    let rows = compute_spectrum(well, j, flags, constants, ExecMode::auto())?;

    if let Some(dir) = &args.dump_wavefunctions {
        let levels = compute_levels(well, j, flags, constants, ExecMode::auto())?;
        dump_wavefunctions(dir, well, j, &levels)?;
    }

    match args.format {
        OutputFormat::Json => {
            let doc = json!({
                "well": well.name(),
                "j": j,
                "flags": {
                    "retarded": flags.retarded,
                    "radial_correction": flags.radial_correction,
                },
                "levels": rows,
            });
            Ok(format!("{:#}\n", doc))
        }
        OutputFormat::Csv => {
            let mut out = String::new();
            writeln!(
                out,
                "well,J,v,E_MHz,eps_ret_MHz,eps_rad_MHz,R_min_a0,R_max_a0,mean_R_a0,near_threshold"
            )
            .unwrap();
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.well,
                    r.j,
                    r.v,
                    fmt_mhz(r.energy_mhz),
                    r.eps_ret_mhz.map(fmt_mhz).unwrap_or_default(),
                    r.eps_rad_mhz.map(fmt_mhz).unwrap_or_default(),
                    fmt_a0(r.r_min_a0),
                    fmt_a0(r.r_max_a0),
                    fmt_a0(r.mean_r_a0),
                    r.near_threshold
                )
                .unwrap();
            }
            Ok(out)
        }
    }
}

fn dump_wavefunctions(dir: &PathBuf, well: Well, j: u32, levels: &[BoundLevel]) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Usage(format!("cannot create {}: {e}", dir.display())))?;
    for level in levels {
        let name = format!("{}_J{}_v{}.csv", well.name().replace('+', "p").replace('-', "m"), j, level.v);
        let mut text = String::from("R_a0,u\n");
        for (r, u) in level.r.iter().zip(level.u.iter()) {
            writeln!(text, "{r:.4},{u:.8e}").unwrap();
        }
        std::fs::write(dir.join(&name), text)
            .map_err(|e| Error::Usage(format!("cannot write {name}: {e}")))?;
    }
    Ok(())
}

fn table1(args: &crate::Table1Args, constants: &PhysicalConstants) -> Result<String> {
    let (well, j) = parse_well_and_j(&args.well, args.j)?;
    let rows = compute_spectrum(well, j, SpectrumFlags::default(), constants, ExecMode::auto())?;
    let experimental = match &args.input {
        None => Vec::new(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Usage(format!("cannot read {}: {e}", p.display())))?;
            io::read_experimental_levels(&text)?
        }
    };
    let exp_for = |v: usize| experimental.iter().find(|e| e.v == v);

    match args.format {
        OutputFormat::Json => {
            let rows_json: Vec<_> = rows
                .iter()
                .map(|r| {
                    let e = exp_for(r.v);
                    json!({
                        "v": r.v,
                        "experiment_mhz": e.map(|e| e.energy_mhz),
                        "experiment_sigma_mhz": e.map(|e| e.sigma_mhz),
                        "theory_mhz": r.energy_mhz,
                        "eps_ret_mhz": r.eps_ret_mhz,
                        "eps_rad_mhz": r.eps_rad_mhz,
                    })
                })
                .collect();
            let doc = json!({ "well": well.name(), "j": j, "rows": rows_json });
            Ok(format!("{:#}\n", doc))
        }
        OutputFormat::Csv => {
            let mut out = String::new();
            writeln!(
                out,
                "v,experiment_MHz,experiment_sigma_MHz,theory_MHz,eps_ret_MHz,eps_rad_MHz"
            )
            .unwrap();
            for r in &rows {
                let (exp, sig) = match exp_for(r.v) {
                    Some(e) => (fmt_mhz(e.energy_mhz), fmt_mhz(e.sigma_mhz)),
                    None => (String::new(), String::new()),
                };
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.v,
                    exp,
                    sig,
                    fmt_mhz(r.energy_mhz),
                    r.eps_ret_mhz.map(fmt_mhz).unwrap_or_default(),
                    r.eps_rad_mhz.map(fmt_mhz).unwrap_or_default(),
                )
                .unwrap();
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// fit-gamma
// ---------------------------------------------------------------------------

fn fit_gamma(args: &crate::FitGammaArgs, constants: &PhysicalConstants) -> Result<String> {
    let (well, j) = parse_well_and_j(&args.well, args.j)?;
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", args.input.display())))?;
    let levels = io::read_experimental_levels(&text)?;
    let fit = fit_c3(well, j, &levels, constants, ExecMode::auto())?;
    let doc = json!({
        "well": well.name(),
        "j": j,
        "c3_au": fit.c3_au,
        "c3_sigma_au": fit.c3_sigma_au,
        "gamma_mhz": fit.gamma_mhz,
        "gamma_sigma_mhz": fit.gamma_sigma_mhz,
        "sensitivity_mhz_per_0p1pct_c3": fit.sensitivity_mhz_per_0p1pct,
        "residuals_mhz": fit.residuals_mhz
            .iter()
            .map(|(v, r)| json!({ "v": v, "residual_mhz": r }))
            .collect::<Vec<_>>(),
    });
    Ok(format!("{:#}\n", doc))
}

// ---------------------------------------------------------------------------
// reduce / budget
// ---------------------------------------------------------------------------

fn condon_radius(
    well: Option<&str>,
    j: Option<u32>,
    v: Option<usize>,
    constants: &PhysicalConstants,
) -> Result<Option<f64>> {
    let (Some(w), Some(v)) = (well, v) else {
        return Ok(None);
    };
    let (well, j) = parse_well_and_j(w, j)?;
    let levels = compute_levels(well, j, SpectrumFlags::default(), constants, ExecMode::auto())?;
    Ok(levels.iter().find(|l| l.v == v).map(|l| l.r_max))
}

fn reduce(args: &crate::ReduceArgs, constants: &PhysicalConstants) -> Result<String> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", args.input.display())))?;
    let input = io::read_reduce_input(&text)?;

    let mut records = Vec::new();
    let mut fit_note = None;
    match input {
        ReduceInput::Measurements(ms) => {
            for m in ms {
                records.push(reduce_record(&m, args, constants)?);
            }
        }
        ReduceInput::Scan(points) => {
            let b0 = args.b0_gauss.ok_or_else(|| {
                Error::Usage("--b0-gauss is required when reducing a raw scan".into())
            })?;
            let fit = lorentzian_fit(&points)?;
            // The off-resonance baseline of the calorimetric signal is the
            // cloud temperature.
            let m = Measurement {
                v_label: args.v_label,
                delta_mhz: fit.center_mhz,
                b0_gauss: b0,
                temperature_uk: fit.offset,
                density_cm3: args.n_cm3,
            };
            records.push(reduce_record(&m, args, constants)?);
            fit_note = Some(fit);
        }
    }

    match args.format {
        OutputFormat::Json => {
            let doc = json!({
                "lorentzian_fit": fit_note,
                "measurements": records,
            });
            Ok(format!("{:#}\n", doc))
        }
        OutputFormat::Csv => {
            let mut out = String::new();
            if let Some(f) = &fit_note {
                writeln!(
                    out,
                    "# lorentzian fit: center={} MHz width={} MHz amplitude={:.4} offset={:.4}",
                    fmt_mhz(f.center_mhz),
                    fmt_mhz(f.width_mhz),
                    f.amplitude,
                    f.offset
                )
                .unwrap();
            }
            writeln!(
                out,
                "v,delta_MHz,b0_Gauss,T_uK,n_cm3,b_MHz,zeeman_MHz,thermal_trap_MHz,\
                 thermal_kinetic_MHz,recoil_MHz,doppler_width_MHz,mean_field_bound_MHz,\
                 condon_radius_a0"
            )
            .unwrap();
            for r in &records {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r["v"].as_u64().map(|v| v.to_string()).unwrap_or_default(),
                    fmt_mhz(r["delta_mhz"].as_f64().unwrap()),
                    r["b0_gauss"].as_f64().unwrap(),
                    r["t_uk"].as_f64().unwrap(),
                    r["n_cm3"].as_f64().map(|v| format!("{v:e}")).unwrap_or_default(),
                    fmt_mhz(r["binding_energy_mhz"].as_f64().unwrap()),
                    fmt_mhz(r["budget"]["zeeman_mhz"].as_f64().unwrap()),
                    fmt_mhz(r["budget"]["thermal_trap_mhz"].as_f64().unwrap()),
                    fmt_mhz(r["budget"]["thermal_kinetic_mhz"].as_f64().unwrap()),
                    fmt_mhz(r["budget"]["recoil_mhz"].as_f64().unwrap()),
                    fmt_mhz(r["budget"]["doppler_width_mhz"].as_f64().unwrap()),
                    r["budget"]["mean_field_bound_mhz"]
                        .as_f64()
                        .map(fmt_mhz)
                        .unwrap_or_default(),
                    r["condon_radius_a0"].as_f64().map(fmt_a0).unwrap_or_default(),
                )
                .unwrap();
            }
            Ok(out)
        }
    }
}

fn reduce_record(
    m: &Measurement,
    args: &crate::ReduceArgs,
    constants: &PhysicalConstants,
) -> Result<serde_json::Value> {
    let b = binding_energy(m, constants)?;
    let budget = shift_budget(m, args.scattering_length_nm, constants)?;
    let condon = condon_radius(args.well.as_deref(), args.j, m.v_label, constants)?;
    Ok(json!({
        "v": m.v_label,
        "delta_mhz": m.delta_mhz,
        "b0_gauss": m.b0_gauss,
        "t_uk": m.temperature_uk,
        "n_cm3": m.density_cm3,
        "binding_energy_mhz": b,
        "budget": budget,
        "condon_radius_a0": condon,
    }))
}

fn budget(args: &crate::BudgetArgs, constants: &PhysicalConstants) -> Result<String> {
    // The detuning never enters the budget; a placeholder satisfies the
    // measurement invariants.
    let m = Measurement {
        v_label: None,
        delta_mhz: -1.0,
        b0_gauss: args.b0_gauss,
        temperature_uk: args.t_uk,
        density_cm3: args.n_cm3,
    };
    let budget = shift_budget(&m, args.scattering_length_nm, constants)?;
    let mc = if args.verify_mc {
        Some(thermal_average_mc(
            args.t_uk,
            args.samples,
            args.seed,
            ExecMode::auto(),
        )?)
    } else {
        None
    };
    let doc = json!({
        "t_uk": args.t_uk,
        "b0_gauss": args.b0_gauss,
        "budget": budget,
        "applied_correction_mhz": budget.applied_correction_mhz(),
        "monte_carlo": mc,
    });
    Ok(format!("{:#}\n", doc))
}

// ---------------------------------------------------------------------------
// basis
// ---------------------------------------------------------------------------

fn basis_dump(args: &crate::BasisArgs) -> Result<String> {
    let blocks = match &args.block {
        Some(name) => vec![parse_block(name)?],
        None => hedimer::basis::ungerade_blocks(),
    };
    let constants = PhysicalConstants::default();
    let entries: Vec<_> = blocks
        .iter()
        .map(|b| {
            let bh = BlockHamiltonian::new(b.clone(), &constants);
            json!({
                "name": b.name(),
                "omega": b.omega,
                "parity": b.parity.suffix(),
                "reflection": b.reflection.map(|r| r.suffix()),
                "dim": b.dim(),
                "labels": b.labels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                "asymptotes": bh
                    .asymptotic_levels()
                    .iter()
                    .map(|(j, _)| format!("P{j}"))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    // The C6-neglect context for the purely long-range domain.
    let c6 = c6_bound(&constants, &[150.0, 300.0, 1000.0])?;
    let doc = json!({ "blocks": entries, "c6_over_c3_ratio": c6 });
    Ok(format!("{:#}\n", doc))
}
