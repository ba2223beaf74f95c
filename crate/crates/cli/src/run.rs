use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hankel_kdv::determinant::{kdv_residual, truncation_study, u_field, Route, SplitData};
use hankel_kdv::io::{self, content_hash, convergence_csv, field_sidecar, field_table, CsvTable};
use hankel_kdv::oracles::split_step_kdv;
use hankel_kdv::potential::{Potential, Side};
use hankel_kdv::scattering::{scatter, split_reflection, ScatteringData, ScatteringOptions, Source};

use crate::config::{RouteKind, RunConfig, ScatterConfig};
use crate::CliError;

/// Resolved inputs shared by every subcommand.
pub struct Context {
    pub cfg: RunConfig,
    pub q: Potential,
    pub out: PathBuf,
    pub cache: bool,
}

impl Context {
    fn cache_path(&self, key: &str) -> PathBuf {
        self.out.join("cache").join(format!("{key}.json"))
    }

    /// Scattering data of `q`, through the on-disk cache when enabled.
    fn data(&self, q: &Potential, source: Source, opts: &ScatteringOptions) -> Result<ScatteringData, CliError> {
        let key = io::scattering_key(q, source, opts)?;
        let path = self.cache_path(&key);
        if self.cache {
            if let Some(sd) = io::load_scattering(&path, &key)? {
                return Ok(sd);
            }
        }
        let sd = scatter(q, source, opts)?;
        if self.cache {
            io::save_scattering(&path, &key, &sd)?;
        }
        Ok(sd)
    }

    fn full_data(&self) -> Result<ScatteringData, CliError> {
        self.data(&self.q, Source::FullLine, &self.cfg.scattering)
    }

    fn split_data(&self) -> Result<SplitData, CliError> {
        let strict = ScatteringOptions {
            shift_on_exceptional: false,
            ..self.cfg.scattering.clone()
        };
        let plus = self.data(&self.q.restrict(Side::Right), Source::RightRestricted, &strict)?;
        Ok(SplitData::with_plus(plus, &self.q, &strict, false)?)
    }

    fn write(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out)?;
        let path = self.out.join(name);
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

enum Data {
    Full(ScatteringData),
    Split(SplitData),
}

impl Data {
    fn load(ctx: &Context, kind: RouteKind) -> Result<Self, CliError> {
        Ok(match kind {
            RouteKind::Full => Data::Full(ctx.full_data()?),
            RouteKind::Split => Data::Split(ctx.split_data()?),
        })
    }

    fn route(&self) -> Route<'_> {
        match self {
            Data::Full(sd) => Route::Full(sd),
            Data::Split(sd) => Route::Split(sd),
        }
    }
}

pub fn scatter_cmd(ctx: &Context) -> Result<(), CliError> {
    let sc = ctx.cfg.scatter.clone().unwrap_or_default();
    let sd = ctx.full_data()?;
    let mut report = String::new();
    writeln!(report, "potential: {}", content_hash(&ctx.q)?).unwrap();
    writeln!(report, "k nodes: {}", sd.coeffs.k_nodes.len()).unwrap();
    writeln!(report, "unitarity defect: {:.3e}", sd.coeffs.unitarity_defect()).unwrap();
    writeln!(report, "symmetry defect: {:.3e}", sd.coeffs.symmetry_defect()).unwrap();
    let r_max = sd.coeffs.r.iter().map(|r| r.norm()).fold(0.0, f64::max);
    writeln!(report, "max |R|: {r_max:.3e}").unwrap();
    if sd.shift != 0.0 {
        writeln!(report, "exceptional profile shifted by {}", sd.shift).unwrap();
    }
    writeln!(report, "bound states: {}", sd.bound_states.len()).unwrap();
    for b in &sd.bound_states {
        writeln!(report, "  kappa = {:.6}  c = {:.6e}", b.kappa, b.c).unwrap();
    }
    split_line(ctx, &sc, &mut report);
    print!("{report}");
    ctx.write("scatter_report.txt", &report)?;
    Ok(())
}

fn split_line(ctx: &Context, sc: &ScatterConfig, report: &mut String) {
    if !sc.split {
        return;
    }
    match split_reflection(&ctx.q, &ctx.cfg.scattering, sc.denominator_floor) {
        Ok((split, _)) => writeln!(report, "split defect: {:.3e}", split.split_defect).unwrap(),
        Err(e) => writeln!(report, "split defect: unavailable ({e})").unwrap(),
    }
}

/// `Ok(false)` when the residual exceeds the configured bound.
pub fn solve_cmd(ctx: &Context) -> Result<bool, CliError> {
    let sc = ctx.cfg.solve.as_ref().ok_or_else(|| CliError::Config("missing [solve] section".into()))?;
    let xs = sc.x.nodes("solve.x")?;
    let ts = sc.t.nodes("solve.t")?;
    if xs.len() < 7 || ts.len() < 3 {
        return Err(CliError::Config(format!(
            "solve grids need >= 7 x-nodes and >= 3 t-nodes for the residual, got {} x {}",
            xs.len(),
            ts.len()
        )));
    }
    let data = Data::load(ctx, sc.route)?;
    let mut field = u_field(data.route(), &xs, &ts, &ctx.cfg.discretization, &ctx.cfg.u)?;
    field.meta.potential_hash = Some(content_hash(&ctx.q)?);
    let res = kdv_residual(&field)?;
    field.residual = Some(res.values.clone());
    field_table(&field)
        .with_meta("residual_max_norm", io::fmt_num(res.max_norm))
        .with_meta("residual_bound", io::fmt_num(sc.residual_bound))
        .write(&ctx.out.join("solution.csv"))?;
    ctx.write("solution.json", &field_sidecar(&field, Some(res.max_norm))?)?;
    let ok = res.max_norm < sc.residual_bound;
    println!(
        "residual max-norm {:.3e} (bound {:.3e}): {}",
        res.max_norm,
        sc.residual_bound,
        if ok { "ok" } else { "exceeded" }
    );
    Ok(ok)
}

pub fn converge_cmd(ctx: &Context) -> Result<(), CliError> {
    let cc = ctx.cfg.converge.as_ref().ok_or_else(|| CliError::Config("missing [converge] section".into()))?;
    if cc.b_list.is_empty() || cc.b_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(CliError::Config("converge.b_list must be non-empty and strictly decreasing".into()));
    }
    if cc.probes.is_empty() {
        return Err(CliError::Config("converge.probes is empty".into()));
    }
    let table = truncation_study(&ctx.q, &cc.b_list, &cc.probes, &ctx.cfg.discretization, &ctx.cfg.scattering, &ctx.cfg.u)?;
    convergence_csv(&table)
        .with_meta("potential_hash", content_hash(&ctx.q)?)
        .write(&ctx.out.join("convergence.csv"))?;
    for (p, &(x, t)) in table.probes.iter().enumerate() {
        let last = table.deltas.last().map_or(0.0, |d| d[p].abs());
        println!("probe ({x}, {t}): last |delta| {last:.3e}, monotone tail {}", table.monotone_tail[p]);
    }
    Ok(())
}

/// `Ok(false)` when the routes differ by more than the tolerance.
pub fn compare_cmd(ctx: &Context) -> Result<bool, CliError> {
    let cc = ctx.cfg.compare.as_ref().ok_or_else(|| CliError::Config("missing [compare] section".into()))?;
    let xs = cc.x.nodes("compare.x")?;
    let (a, b) = cc.domain;
    if cc.n_modes < 16 {
        return Err(CliError::Config("compare.n_modes must be >= 16".into()));
    }
    let dx = (b - a) / cc.n_modes as f64;
    let index: Vec<usize> = xs
        .iter()
        .map(|&x| {
            let j = ((x - a) / dx).round();
            if j >= 0.0 && (j as usize) < cc.n_modes && (a + j * dx - x).abs() <= 1e-9 * dx.max(1.0) {
                Ok(j as usize)
            } else {
                Err(CliError::Config(format!("compare.x node {x} is not on the split-step grid (domain {a}..{b}, step {dx})")))
            }
        })
        .collect::<Result<_, _>>()?;
    let data = Data::load(ctx, cc.route)?;
    let field = u_field(data.route(), &xs, &[cc.t], &ctx.cfg.discretization, &ctx.cfg.u)?;
    let ss = split_step_kdv(&ctx.q, cc.t, cc.domain, cc.n_modes, cc.dt)?;
    let mut table = CsvTable::new(&["x", "t", "u_determinant", "u_split_step", "diff"])
        .with_meta("potential_hash", content_hash(&ctx.q)?)
        .with_meta("route", field.meta.route.clone());
    let mut worst = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let (ud, us) = (field.u[0][i], ss.u[index[i]]);
        worst = worst.max((ud - us).abs());
        table.rows.push(vec![x, cc.t, ud, us, ud - us]);
    }
    table = table.with_meta("linf_diff", io::fmt_num(worst));
    table.write(&ctx.out.join("compare.csv"))?;
    let ok = worst < cc.tolerance;
    println!("L-inf difference {worst:.3e} (tolerance {:.3e}): {}", cc.tolerance, if ok { "ok" } else { "exceeded" });
    Ok(ok)
}

pub fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}
