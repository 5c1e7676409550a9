//! Subcommand arguments and their handlers.

use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use steklov_core::disk_steklov::{
    capacitance_large_kappa, capacitance_taylor, monopole_e_heuristic, CapacitanceMode, CapacitanceModel,
    DiskSteklovSpectrum,
};
use steklov_core::expansions::{
    homogenization_warning, homogenized_mean_time, k_eff, k_eff_large_kappa, k_eff_small_kappa, mfrt_coeffs,
    models_for_layout, principal_eigenvalue, splitting_coeffs, splitting_sum_check, surface_fraction, ExpansionResult,
};
use steklov_core::io::{LayoutFile, PatchSize};
use steklov_core::oracle::{sn_oracle, sn_oracle_extrapolated, OracleResult};
use steklov_core::patch_geometry::geometric_coeffs_arbitrary;
use steklov_core::sphere_geometry::{antipodal_pair, fibonacci_layout, platonic_layout, PatchLayout};
use steklov_core::steklov_asym::{
    resonant_groups, sdn_eigenvalues, sn_near_resonant, sn_nonresonant, zero_bulk_branches, EigenBranch,
};
use steklov_core::Reactivity;

use crate::output::{Cell, Report, Table};
use crate::reproduce::ReproduceArgs;
use crate::{CliError, Global};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reactive capacitance C(κ) of a disk patch.
    Capacitance(CapacitanceArgs),
    /// Monopole coefficient E(κ) of a disk patch.
    Monopole(CapacitanceArgs),
    /// Local Steklov eigenvalues, weights and Neumann zeros of a disk.
    Spectrum(SpectrumArgs),
    /// Three-term mean first-reaction time expansion.
    Mfrt(ExpansionArgs),
    /// Three-term splitting probability expansions.
    Splitting(SplittingArgs),
    /// Three-term principal eigenvalue expansion.
    Lambda0(ExpansionArgs),
    /// SDN eigenvalue asymptotics: patch 0 is Steklov, the others Dirichlet.
    Sdn(EigenArgs),
    /// SN eigenvalue asymptotics: every patch is Steklov.
    Sn(SnArgs),
    /// Legendre-Galerkin SN eigenvalues for one or two polar patches.
    SnOracle(OracleArgs),
    /// Effective reactivity of many small identical patches.
    Homog(HomogArgs),
    /// Area and small-reactivity coefficients c2, c3 of a polygonal patch.
    Shape(ShapeArgs),
    /// Recompute a published table and compare entry by entry.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Spectral,
    Sigmoidal,
    Taylor,
    LargeKappa,
}

#[derive(Debug, Args)]
pub struct ModeArgs {
    /// How C and E are evaluated.
    #[arg(long, value_enum, default_value_t = ModeArg::Spectral)]
    mode: ModeArg,
    /// Order of the small-reactivity polynomial (1 to 3) for `--mode taylor`.
    #[arg(long, default_value_t = 3)]
    taylor_order: usize,
}

impl ModeArgs {
    fn mode(&self) -> Result<CapacitanceMode, CliError> {
        Ok(match self.mode {
            ModeArg::Spectral => CapacitanceMode::Spectral,
            ModeArg::Sigmoidal => CapacitanceMode::Sigmoidal,
            ModeArg::LargeKappa => CapacitanceMode::LargeKappa,
            ModeArg::Taylor => {
                if !(1..=3).contains(&self.taylor_order) {
                    return Err(CliError::Config(format!(
                        "--taylor-order must be 1, 2 or 3, got {}",
                        self.taylor_order
                    )));
                }
                CapacitanceMode::Taylor(self.taylor_order)
            }
        })
    }
}

#[derive(Debug, Args)]
pub struct CapacitanceArgs {
    /// Disk radius.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Reactivities, comma separated; `inf` is the Dirichlet limit.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    kappa: Vec<Reactivity>,
    #[command(flatten)]
    mode: ModeArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Disk radius.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Number of modes listed.
    #[arg(long, default_value_t = 8)]
    count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// One patch at the north pole.
    Single,
    /// Two patches at the poles.
    Antipodal,
    /// `--count` patches on a Fibonacci lattice.
    Fibonacci,
    /// Vertices of the platonic solid with `--count` vertices.
    Platonic,
}

/// Where the patch layout comes from and where expansions are evaluated.
#[derive(Debug, Args)]
pub struct LayoutArgs {
    /// JSON layout file.
    #[arg(long)]
    layout: Option<PathBuf>,
    /// JSON layout given inline.
    #[arg(long)]
    layout_json: Option<String>,
    /// Built-in arrangement of identical unit patches.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Number of patches for the fibonacci and platonic presets.
    #[arg(long)]
    count: Option<usize>,
    /// Reactivity of the preset patches.
    #[arg(long, default_value = "inf", allow_hyphen_values = true)]
    kappa: Reactivity,
    /// Patch size as the geodesic angle (radians).
    #[arg(long)]
    angle: Option<f64>,
    /// Patch size as the chord length.
    #[arg(long)]
    chord: Option<f64>,
    /// Dimensional patch radius L (with --sphere-radius).
    #[arg(long)]
    patch_radius: Option<f64>,
    /// Dimensional sphere radius R (with --patch-radius).
    #[arg(long)]
    sphere_radius: Option<f64>,
    /// Values of ε at which to evaluate, comma separated (default: the layout's ε).
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
}

impl LayoutArgs {
    fn size(&self) -> Result<Option<PatchSize>, CliError> {
        let mut forms = Vec::new();
        if let Some(a) = self.angle {
            forms.push(PatchSize::Angle(a));
        }
        if let Some(c) = self.chord {
            forms.push(PatchSize::Chord(c));
        }
        match (self.patch_radius, self.sphere_radius) {
            (Some(l), Some(r)) => forms.push(PatchSize::Dimensional { patch_radius: l, sphere_radius: r }),
            (None, None) => {}
            _ => return Err(CliError::Config("--patch-radius and --sphere-radius go together".into())),
        }
        match forms.len() {
            0 => Ok(None),
            1 => Ok(Some(forms[0])),
            _ => Err(CliError::Config("give the patch size in exactly one form".into())),
        }
    }

    /// The validated layout and the evaluation points.
    pub fn resolve(&self) -> Result<(PatchLayout, Vec<f64>), CliError> {
        let sources = [self.layout.is_some(), self.layout_json.is_some(), self.preset.is_some()];
        if sources.iter().filter(|s| **s).count() != 1 {
            return Err(CliError::Config("give exactly one of --layout, --layout-json or --preset".into()));
        }
        let size = self.size()?;
        let layout = if let Some(preset) = self.preset {
            let size = size.ok_or_else(|| {
                CliError::Config("a preset needs a size: --angle, --chord or --patch-radius/--sphere-radius".into())
            })?;
            let centers = match (preset, self.count) {
                (Preset::Single, None | Some(1)) => vec![[0.0, 0.0, 1.0]],
                (Preset::Antipodal, None | Some(2)) => antipodal_pair(),
                (Preset::Fibonacci, Some(n)) => fibonacci_layout(n)?,
                (Preset::Platonic, Some(n)) => platonic_layout(n)?,
                (Preset::Fibonacci | Preset::Platonic, None) => {
                    return Err(CliError::Config("this preset needs --count".into()))
                }
                (p, Some(n)) => {
                    return Err(CliError::Config(format!("preset {p:?} does not take --count {n}")));
                }
            };
            PatchLayout::identical(centers, self.kappa, size.epsilon()?)?
        } else {
            if size.is_some() {
                return Err(CliError::Config("the layout file already states the patch size".into()));
            }
            let file = match (&self.layout, &self.layout_json) {
                (Some(path), _) => LayoutFile::read(path)?,
                (_, Some(text)) => LayoutFile::parse(text)?,
                _ => unreachable!("one source is present"),
            };
            file.to_layout()?
        };
        let eps = if self.eps.is_empty() { vec![layout.epsilon] } else { self.eps.clone() };
        for e in &eps {
            layout.with_epsilon(*e)?;
        }
        Ok((layout, eps))
    }
}

#[derive(Debug, Args)]
pub struct ShapeArgs {
    /// JSON file holding the boundary as `[[x, y], ...]`, counterclockwise.
    #[arg(long, conflicts_with = "boundary_json", required_unless_present = "boundary_json")]
    boundary: Option<PathBuf>,
    /// The boundary given inline in the same format.
    #[arg(long)]
    boundary_json: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExpansionArgs {
    #[command(flatten)]
    layout: LayoutArgs,
    #[command(flatten)]
    mode: ModeArgs,
}

#[derive(Debug, Args)]
pub struct SplittingArgs {
    #[command(flatten)]
    layout: LayoutArgs,
    #[command(flatten)]
    mode: ModeArgs,
    /// Target patch (default: every patch).
    #[arg(long)]
    target: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[command(flatten)]
    layout: LayoutArgs,
    /// Number of branches.
    #[arg(long, default_value_t = 3)]
    branches: usize,
}

#[derive(Debug, Args)]
pub struct SnArgs {
    #[command(flatten)]
    layout: LayoutArgs,
    /// Number of non-resonant branches.
    #[arg(long, default_value_t = 3)]
    branches: usize,
    /// Local modes used for near-resonant branches when all patches are identical.
    #[arg(long, default_value_t = 3)]
    resonant_modes: usize,
    /// Leading-order branches concentrated on a single patch, k = 1..=N.
    #[arg(long, default_value_t = 0)]
    zero_bulk: usize,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Polar half-opening angles: north patch, then optionally south patch.
    #[arg(long, value_delimiter = ',', conflicts_with = "chords")]
    angles: Vec<f64>,
    /// The same patch sizes given as chord lengths.
    #[arg(long, value_delimiter = ',')]
    chords: Vec<f64>,
    /// Legendre truncation degree.
    #[arg(long, default_value_t = 1000)]
    nmax: usize,
    /// Number of eigenvalues reported.
    #[arg(long, default_value_t = 5)]
    neigs: usize,
    /// Also solve at 2·nmax and extrapolate the truncation error away.
    #[arg(long)]
    extrapolate: bool,
}

#[derive(Debug, Args)]
pub struct HomogArgs {
    /// Patch reactivity.
    #[arg(long, default_value = "inf", allow_hyphen_values = true)]
    kappa: Reactivity,
    /// Patch size ε.
    #[arg(long)]
    eps: f64,
    /// Number of patches.
    #[arg(long)]
    count: usize,
    /// Lattice constant of the discrete energy.
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    b1: f64,
    #[command(flatten)]
    mode: ModeArgs,
}

pub fn run(command: &Command, g: &Global) -> Result<Report, CliError> {
    match command {
        Command::Capacitance(a) => capacitance(a, g),
        Command::Monopole(a) => monopole(a, g),
        Command::Spectrum(a) => spectrum(a, g),
        Command::Mfrt(a) => {
            let (layout, eps) = a.layout.resolve()?;
            let models = models_for_layout(&g.unit_spectrum()?, &layout, a.mode.mode()?)?;
            let r = mfrt_coeffs(&layout, &models)?;
            Ok(expansion_report(&layout, &r, &eps, "mfrt"))
        }
        Command::Lambda0(a) => {
            let (layout, eps) = a.layout.resolve()?;
            let models = models_for_layout(&g.unit_spectrum()?, &layout, a.mode.mode()?)?;
            // The coefficients do not depend on ε; the layout's own ε only fixes the geometry check.
            let r = principal_eigenvalue(&layout, &models, layout.epsilon)?;
            Ok(expansion_report(&layout, &r, &eps, "lambda0"))
        }
        Command::Splitting(a) => splitting(a, g),
        Command::Sdn(a) => sdn(a, g),
        Command::Sn(a) => sn(a, g),
        Command::SnOracle(a) => oracle(a),
        Command::Homog(a) => homog(a, g),
        Command::Shape(a) => shape(a),
        Command::Reproduce(a) => crate::reproduce::run(a, g),
    }
}

fn check_radius(radius: f64) -> Result<(), CliError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CliError::Config(format!("--radius must be positive, got {radius}")));
    }
    Ok(())
}

fn shape(a: &ShapeArgs) -> Result<Report, CliError> {
    let text = match (&a.boundary, &a.boundary_json) {
        (Some(path), _) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?,
        (_, Some(text)) => text.clone(),
        _ => unreachable!("clap requires one source"),
    };
    let boundary: Vec<[f64; 2]> =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("malformed boundary: {e}")))?;
    let g = geometric_coeffs_arbitrary(&boundary)?;
    let mut t = Table::new("shape", &["vertices", "area", "half_diameter", "c2", "c3"]);
    t.push(vec![boundary.len().into(), g.area.into(), g.half_diameter.into(), g.c2.into(), g.c3.into()]);
    Ok(Report { tables: vec![t] })
}

fn capacitance(a: &CapacitanceArgs, g: &Global) -> Result<Report, CliError> {
    check_radius(a.radius)?;
    let mode = a.mode.mode()?;
    let model = CapacitanceModel::new(g.unit_spectrum()?.scaled(a.radius)?, mode);
    let mut t = Table::new("capacitance", &["kappa", "C", "dC_dkappa", "warning"]);
    for k in &a.kappa {
        let warning = match (mode, k) {
            (CapacitanceMode::Taylor(order), Reactivity::Finite(x)) => {
                capacitance_taylor(a.radius, &model.taylor_coeffs(order)?, *x).warning
            }
            (CapacitanceMode::LargeKappa, k) => capacitance_large_kappa(a.radius, *k).warning,
            _ => None,
        };
        t.push(vec![
            k.to_string().into(),
            model.capacitance(*k)?.into(),
            model.capacitance_derivative(*k)?.into(),
            warning.unwrap_or_default().into(),
        ]);
    }
    Ok(Report { tables: vec![t] })
}

fn monopole(a: &CapacitanceArgs, g: &Global) -> Result<Report, CliError> {
    check_radius(a.radius)?;
    let model = CapacitanceModel::new(g.unit_spectrum()?.scaled(a.radius)?, a.mode.mode()?);
    let mut t = Table::new("monopole", &["kappa", "C", "E", "E_over_C2", "E_heuristic"]);
    for k in &a.kappa {
        let c = model.capacitance(*k)?;
        let e = model.monopole_e(*k)?;
        t.push(vec![
            k.to_string().into(),
            c.into(),
            e.into(),
            (e / (c * c)).into(),
            monopole_e_heuristic(a.radius, *k).into(),
        ]);
    }
    Ok(Report { tables: vec![t] })
}

fn spectrum(a: &SpectrumArgs, g: &Global) -> Result<Report, CliError> {
    check_radius(a.radius)?;
    if a.count == 0 || a.count > g.n_modes {
        return Err(CliError::Config(format!("--count must be in 1..={}", g.n_modes)));
    }
    let model = CapacitanceModel::spectral(g.unit_spectrum()?.scaled(a.radius)?);
    let s = &model.spectrum;
    let zeros = if a.count < g.n_modes { Some(model.neumann_zeros(a.count - 1)?) } else { None };
    let norm = std::f64::consts::PI * a.radius * a.radius;
    let mut t = Table::new("spectrum", &["k", "mu", "d", "d2_over_pi_a2", "cumulative", "mu_neumann"]);
    let mut cumulative = 0.0;
    for k in 0..a.count {
        let w = s.d[k] * s.d[k] / norm;
        cumulative += w;
        t.push(vec![
            k.into(),
            s.mu[k].into(),
            s.d[k].abs().into(),
            w.into(),
            cumulative.into(),
            zeros.as_ref().map(|z| z[k]).into(),
        ]);
    }
    Ok(Report { tables: vec![t] })
}

fn patch_table(layout: &PatchLayout, r: &ExpansionResult) -> Table {
    let mut t = Table::new("patches", &["patch", "x", "y", "z", "radius", "kappa", "C", "E"]);
    for i in 0..layout.len() {
        let c = layout.centers[i];
        t.push(vec![
            i.into(),
            c[0].into(),
            c[1].into(),
            c[2].into(),
            layout.radii[i].into(),
            layout.reactivities[i].to_string().into(),
            r.capacitances[i].into(),
            r.monopoles[i].into(),
        ]);
    }
    t
}

fn terms_table(name: &str, r: &ExpansionResult) -> Table {
    let mut t = Table::new(name, &["term", "power", "gauge", "coefficient"]);
    for term in &r.terms {
        t.push(vec![
            term.label.clone().into(),
            Cell::Int(term.power as i64),
            term.gauge.label().into(),
            term.coefficient.into(),
        ]);
    }
    t
}

fn values_table(name: &str, r: &ExpansionResult, eps: &[f64]) -> Table {
    let mut columns = vec!["eps".to_string(), "value".to_string()];
    columns.extend(r.terms.iter().map(|t| t.label.clone()));
    let mut t = Table::with_columns(name, columns);
    for e in eps {
        let mut row = vec![Cell::Num(*e), Cell::Num(r.evaluate(*e))];
        row.extend(r.term_values(*e).into_iter().map(Cell::Num));
        t.push(row);
    }
    t
}

fn flags_table(flags: &[String]) -> Option<Table> {
    if flags.is_empty() {
        return None;
    }
    let mut t = Table::new("flags", &["message"]);
    for f in flags {
        t.push(vec![f.clone().into()]);
    }
    Some(t)
}

fn expansion_report(layout: &PatchLayout, r: &ExpansionResult, eps: &[f64], name: &str) -> Report {
    let mut rep = Report::default();
    rep.add(patch_table(layout, r));
    rep.add(terms_table(&format!("{name}_terms"), r));
    rep.add(values_table(&format!("{name}_values"), r, eps));
    if let Some(f) = flags_table(&r.flags) {
        rep.add(f);
    }
    rep
}

fn splitting(a: &SplittingArgs, g: &Global) -> Result<Report, CliError> {
    let (layout, eps) = a.layout.resolve()?;
    let models = models_for_layout(&g.unit_spectrum()?, &layout, a.mode.mode()?)?;
    let targets: Vec<usize> = match a.target {
        Some(t) if t >= layout.len() => {
            return Err(CliError::Config(format!("--target {t} but the layout has {} patches", layout.len())))
        }
        Some(t) => vec![t],
        None => (0..layout.len()).collect(),
    };
    let results: Vec<ExpansionResult> =
        targets.iter().map(|t| splitting_coeffs(&layout, &models, *t)).collect::<Result<_, _>>()?;
    let mut rep = Report::default();
    rep.add(patch_table(&layout, &results[0]));
    let mut terms = Table::new("splitting_terms", &["target", "term", "power", "gauge", "coefficient"]);
    let mut values = Table::new("splitting_values", &["target", "eps", "value"]);
    for (t, r) in targets.iter().zip(&results) {
        for term in &r.terms {
            terms.push(vec![
                (*t).into(),
                term.label.clone().into(),
                Cell::Int(term.power as i64),
                term.gauge.label().into(),
                term.coefficient.into(),
            ]);
        }
        for e in &eps {
            values.push(vec![(*t).into(), Cell::Num(*e), r.evaluate(*e).into()]);
        }
    }
    rep.add(terms);
    rep.add(values);
    if a.target.is_none() {
        let mut sums = Table::new("splitting_sum", &["eps", "sum_minus_one"]);
        for e in &eps {
            sums.push(vec![Cell::Num(*e), splitting_sum_check(&layout, &models, *e)?.into()]);
        }
        rep.add(sums);
    }
    let flags: Vec<String> = results.iter().flat_map(|r| r.flags.iter().cloned()).collect();
    if let Some(f) = flags_table(&flags) {
        rep.add(f);
    }
    Ok(rep)
}

fn branch_report(branches: &[EigenBranch], eps: &[f64]) -> Report {
    let mut columns: Vec<String> = ["regime", "k", "multiplicity", "sigma0", "sigma1", "sigma2", "alpha", "j_integral"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    columns.extend(eps.iter().map(|e| format!("sigma(eps={e})")));
    let mut t = Table::with_columns("branches", columns);
    let mut notes = Table::new("notes", &["branch", "note"]);
    for (i, b) in branches.iter().enumerate() {
        let mut row = vec![
            b.regime.label().into(),
            b.k.into(),
            b.multiplicity.into(),
            b.sigma0.into(),
            b.sigma1.into(),
            b.sigma2.into(),
            b.alpha.into(),
            b.j_integral.into(),
        ];
        row.extend(eps.iter().map(|e| Cell::Num(b.evaluate(*e))));
        t.push(row);
        for n in &b.notes {
            notes.push(vec![i.into(), n.clone().into()]);
        }
    }
    let mut rep = Report { tables: vec![t] };
    if !notes.rows.is_empty() {
        rep.add(notes);
    }
    rep
}

fn spectral_models(layout: &PatchLayout, g: &Global) -> Result<Vec<CapacitanceModel>, CliError> {
    Ok(models_for_layout(&g.unit_spectrum()?, layout, CapacitanceMode::Spectral)?)
}

fn sdn(a: &EigenArgs, g: &Global) -> Result<Report, CliError> {
    let (layout, eps) = a.layout.resolve()?;
    if layout.len() < 2 {
        return Err(CliError::Config("the SDN problem needs a Steklov patch and at least one Dirichlet patch".into()));
    }
    if let Some(i) = (1..layout.len()).find(|i| !layout.reactivities[*i].is_infinite()) {
        return Err(CliError::Config(format!("patch {i} must be Dirichlet (kappa \"inf\"); only patch 0 is Steklov")));
    }
    let models = spectral_models(&layout, g)?;
    let branches = sdn_eigenvalues(&models[0], &models[1..], &layout.centers, a.branches)?;
    Ok(branch_report(&branches, &eps))
}

fn sn(a: &SnArgs, g: &Global) -> Result<Report, CliError> {
    let (layout, eps) = a.layout.resolve()?;
    let models = spectral_models(&layout, g)?;
    let mut branches = sn_nonresonant(&models, &layout.centers, a.branches)?;
    let groups = resonant_groups(&models);
    if layout.len() > 1 && groups.len() == 1 && groups[0].len() == layout.len() {
        for k in 0..a.resonant_modes {
            branches.extend(sn_near_resonant(&models[0], &layout.centers, k)?);
        }
    }
    if a.zero_bulk > 0 {
        branches.extend(zero_bulk_branches(&models[0], a.zero_bulk)?);
    }
    branches.sort_by(|x, y| x.evaluate(layout.epsilon).total_cmp(&y.evaluate(layout.epsilon)));
    Ok(branch_report(&branches, &eps))
}

fn oracle(a: &OracleArgs) -> Result<Report, CliError> {
    let angles: Vec<f64> = if !a.chords.is_empty() {
        a.chords.iter().map(|c| PatchSize::Chord(*c).epsilon()).collect::<Result<_, _>>()?
    } else {
        a.angles.clone()
    };
    if angles.is_empty() {
        return Err(CliError::Config("give --angles or --chords".into()));
    }
    let r = if a.extrapolate {
        sn_oracle_extrapolated(&angles, a.nmax, a.neigs)?
    } else {
        sn_oracle(&angles, a.nmax, a.neigs)?
    };
    Ok(oracle_report(&r))
}

pub fn oracle_report(r: &OracleResult) -> Report {
    let mut ev = Table::new("eigenvalues", &["index", "sigma", "mu"]);
    for (i, (s, m)) in r.eigenvalues.iter().zip(&r.flux_eigenvalues).enumerate() {
        ev.push(vec![i.into(), (*s).into(), (*m).into()]);
    }
    let mut patches = Table::new("patches", &["patch", "pole", "angle", "chord"]);
    for (i, (a, c)) in r.patch_angles.iter().zip(&r.patch_chords).enumerate() {
        patches.push(vec![i.into(), if i == 0 { "north" } else { "south" }.into(), (*a).into(), (*c).into()]);
    }
    let d = &r.diagnostics;
    let mut diag = Table::new(
        "run",
        &["epsilon", "n_max", "trace_defect", "discarded", "min_beta", "max_imaginary", "extrapolation_correction"],
    );
    diag.push(vec![
        r.epsilon.into(),
        r.n_max.into(),
        d.trace_defect.into(),
        d.discarded.into(),
        d.min_beta.into(),
        d.max_imaginary.into(),
        d.extrapolation_correction.into(),
    ]);
    Report { tables: vec![ev, patches, diag] }
}

fn homog(a: &HomogArgs, g: &Global) -> Result<Report, CliError> {
    if a.count == 0 {
        return Err(CliError::Config("--count must be positive".into()));
    }
    let model = CapacitanceModel::new(g.unit_spectrum()?, a.mode.mode()?);
    let c = model.capacitance(a.kappa)?;
    let e = model.monopole_e(a.kappa)?;
    let f = surface_fraction(a.count, a.eps);
    let keff = k_eff(c, e, f, a.eps, a.b1)?;
    let (limit, closed) = match a.kappa {
        Reactivity::Infinite => ("large_kappa", k_eff_large_kappa(f, a.eps, a.b1)),
        Reactivity::Finite(k) => ("small_kappa", k_eff_small_kappa(k, f, a.eps, a.b1)),
    };
    let mut t = Table::new(
        "homogenization",
        &["kappa", "eps", "count", "f", "C", "E", "k_eff", "limit_form", "k_eff_limit_form", "mean_time", "warning"],
    );
    t.push(vec![
        a.kappa.to_string().into(),
        a.eps.into(),
        a.count.into(),
        f.into(),
        c.into(),
        e.into(),
        keff.into(),
        limit.into(),
        closed.into(),
        homogenized_mean_time(keff).into(),
        homogenization_warning(f).unwrap_or_default().into(),
    ]);
    Ok(Report { tables: vec![t] })
}

/// Solves (or loads) the unit-disk spectrum once per process.
pub fn load_unit_spectrum(g: &Global) -> Result<DiskSteklovSpectrum, CliError> {
    let s = match &g.cache_dir {
        Some(dir) => DiskSteklovSpectrum::cached(dir, 1.0, g.n_modes, g.n_quad)?,
        None => DiskSteklovSpectrum::solve(1.0, g.n_modes, g.n_quad)?,
    };
    Ok(s)
}
