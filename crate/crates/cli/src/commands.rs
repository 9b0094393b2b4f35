use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use supertile::experiments::deviation::{summarize, sweep_extent};
use supertile::experiments::limitlaw::{limitlaw_study, LimitLawConfig};
use supertile::experiments::{deviation_curve, log_grid, SweepConfig};
use supertile::spectral::SpectralReport;
use supertile::tiling::{find_seed, generate_patch, PlacedTile, DEFAULT_PATCH_CAP};
use supertile::{
    builtin, validate_system, CylFunction, Domain, Error, Result, SpectralData, SpectralMode,
    SubstitutionSystem, TilingView,
};

use crate::{Cli, Command, DomainArg};

const TOOL: &str = concat!("supertile ", env!("CARGO_PKG_VERSION"));

struct Loaded {
    sys: SubstitutionSystem,
    default_f: Option<CylFunction>,
    default_range: Option<(f64, f64)>,
}

fn load_unchecked(cli: &Cli) -> Result<Loaded> {
    match (&cli.source.system, &cli.source.json) {
        (Some(name), _) => {
            let e = builtin(name)?;
            Ok(Loaded { sys: e.system, default_f: Some(e.default_f), default_range: Some(e.default_range) })
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)?;
            let sys = SubstitutionSystem::from_json_unchecked(&text)?;
            Ok(Loaded { sys, default_f: None, default_range: None })
        }
        (None, None) => Err(Error::InvalidArgument("one of --system or --json is required".into())),
    }
}

fn load(cli: &Cli) -> Result<Loaded> {
    let l = load_unchecked(cli)?;
    if cli.source.json.is_some() {
        validate_system(&l.sys, cli.tol).into_result()?;
    }
    Ok(l)
}

fn resolve_f(arg: &Option<Vec<f64>>, l: &Loaded) -> Result<CylFunction> {
    let m = l.sys.m();
    let f = match (arg, &l.default_f) {
        (Some(c), _) => CylFunction::new(c.clone()),
        (None, Some(f)) => f.clone(),
        (None, None) => CylFunction::indicator(m, 0),
    };
    if f.c.len() != m {
        return Err(Error::InvalidArgument(format!(
            "--f has {} entries, system has {m} prototiles",
            f.c.len()
        )));
    }
    Ok(f)
}

fn out_dir(cli: &Cli) -> Result<PathBuf> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Metadata embedded in every output file.
#[derive(Serialize)]
struct Header<'a> {
    tool: &'a str,
    command: &'a str,
    system: &'a str,
    config: &'a Value,
    seed: Option<u64>,
    spectrum: Option<SpectralReport>,
}

impl Header<'_> {
    fn csv_lines(&self) -> Result<String> {
        let mut s = String::new();
        s.push_str(&format!("# tool: {}\n# command: {}\n# system: {}\n", self.tool, self.command, self.system));
        s.push_str(&format!("# config: {}\n", serde_json::to_string(self.config)?));
        match self.seed {
            Some(x) => s.push_str(&format!("# seed: {x}\n")),
            None => s.push_str("# seed: none\n"),
        }
        s.push_str(&format!("# spectrum: {}\n", serde_json::to_string(&self.spectrum)?));
        Ok(s)
    }
}

fn write_json(path: &Path, header: &Header, result: &impl Serialize) -> Result<()> {
    let doc = json!({ "header": header, "result": result });
    fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(())
}

fn spectrum(sys: &SubstitutionSystem) -> Result<SpectralData> {
    SpectralData::from_system(sys, SpectralMode::Power)
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Validate => validate(cli),
        Command::Render { order, kind, outlines } => render(cli, *order, *kind, *outlines),
        Command::Deviation { f, domain, rmin, rmax, rpoints, depth, no_anchors } => {
            deviation(cli, f, *domain, *rmin, *rmax, *rpoints, *depth, *no_anchors)
        }
        Command::Limitlaw { f, n_range, samples, r_grid, seed, window_factor } => {
            limitlaw(cli, f, n_range, *samples, r_grid, *seed, *window_factor)
        }
        Command::Spectrum => {
            let l = load(cli)?;
            let report = spectrum(&l.sys)?.report();
            let text = serde_json::to_string_pretty(&report)? + "\n";
            print!("{text}");
            if cli.out.is_some() {
                let config = json!({});
                let header = Header {
                    tool: TOOL,
                    command: "spectrum",
                    system: &l.sys.name,
                    config: &config,
                    seed: None,
                    spectrum: Some(report.clone()),
                };
                write_json(&out_dir(cli)?.join("spectrum.json"), &header, &report)?;
            }
            Ok(0)
        }
        Command::Export => {
            let l = load(cli)?;
            let text = l.sys.to_json() + "\n";
            match &cli.out {
                Some(_) => fs::write(out_dir(cli)?.join(format!("{}.json", l.sys.name)), text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
    }
}

fn validate(cli: &Cli) -> Result<u8> {
    let l = load_unchecked(cli)?;
    let report = validate_system(&l.sys, cli.tol);
    let valid = report.is_valid();
    let config = json!({ "tol": cli.tol });
    let header = Header {
        tool: TOOL,
        command: "validate",
        system: &l.sys.name,
        config: &config,
        seed: None,
        spectrum: if valid { spectrum(&l.sys).ok().map(|s| s.report()) } else { None },
    };
    write_json(&out_dir(cli)?.join("validate.json"), &header, &report)?;
    if valid {
        println!("{}: valid (primitive at power {:?})", l.sys.name, report.primitivity_power);
        Ok(0)
    } else {
        let codes: Vec<&str> = report.rejections.iter().map(|r| r.code()).collect();
        println!("{}: rejected: {}", l.sys.name, codes.join(", "));
        Ok(2)
    }
}

fn render(cli: &Cli, order: u32, kind: usize, outlines: bool) -> Result<u8> {
    let l = load(cli)?;
    let sys = &l.sys;
    if kind == 0 || kind > sys.m() {
        return Err(Error::InvalidArgument(format!("--kind must be in 1..={}", sys.m())));
    }
    let patch = generate_patch(sys, kind - 1, order, DEFAULT_PATCH_CAP)?;
    let mut frames = Vec::new();
    if outlines {
        let mut level = vec![PlacedTile::new(kind - 1, order as i32, [0.0; 2])];
        while level[0].order > 0 {
            frames.extend_from_slice(&level);
            level = level.iter().flat_map(|t| t.children(sys)).collect();
        }
    }
    let mut svg = crate::svg::render(sys, &patch.tiles, &frames);
    let config = json!({ "order": order, "kind": kind, "outlines": outlines });
    let header = Header {
        tool: TOOL,
        command: "render",
        system: &sys.name,
        config: &config,
        seed: None,
        spectrum: spectrum(sys).ok().map(|s| s.report()),
    };
    let meta = serde_json::to_string(&header)?.replace("--", "- -");
    svg.insert_str(svg.find('\n').map_or(0, |i| i + 1), &format!("<!-- {meta} -->\n"));
    fs::write(out_dir(cli)?.join("render.svg"), svg)?;
    println!("{}: rendered {} tiles of order {order}", sys.name, patch.tiles.len());
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn deviation(
    cli: &Cli,
    f: &Option<Vec<f64>>,
    domain: DomainArg,
    rmin: Option<f64>,
    rmax: Option<f64>,
    rpoints: usize,
    depth: Option<u32>,
    no_anchors: bool,
) -> Result<u8> {
    let l = load(cli)?;
    let f = resolve_f(f, &l)?;
    let lam = l.sys.lambda;
    let (dmin, dmax) = l.default_range.unwrap_or((lam.powi(2), lam.powi(8)));
    let (rmin, rmax) = (rmin.unwrap_or(dmin), rmax.unwrap_or(dmax));
    if !(rmin > 0.0 && rmax >= rmin && rpoints >= 1) {
        return Err(Error::InvalidArgument("need 0 < rmin <= rmax and rpoints >= 1".into()));
    }
    let spec = spectrum(&l.sys)?;
    let dim = l.sys.dim;
    let base = match domain {
        DomainArg::Cube => Domain::cube(dim, 1.0),
        DomainArg::Ball => Domain::ball(dim, 0.5),
    };
    let cfg = SweepConfig { anchored: !no_anchors, ..SweepConfig::default() };
    let grid = log_grid(rmin, rmax, rpoints);
    let sys = Arc::new(l.sys);
    let seed = find_seed(&sys, 64)?;
    let view = match depth {
        Some(k) => TilingView::new(sys.clone(), seed, k)?,
        None => TilingView::covering(sys.clone(), seed, &sweep_extent(&sys, &base, rmax, &cfg))?,
    };
    let table = deviation_curve(&view, &spec, &f, &base, &grid, &cfg)?;

    let config = json!({
        "f": f.c,
        "domain": table.domain,
        "rmin": rmin,
        "rmax": rmax,
        "rpoints": rpoints,
        "depth": view.depth(),
        "sweep": cfg,
    });
    let header = Header {
        tool: TOOL,
        command: "deviation",
        system: &sys.name,
        config: &config,
        seed: None,
        spectrum: Some(spec.report()),
    };
    let dir = out_dir(cli)?;
    let mut w = BufWriter::new(fs::File::create(dir.join("deviation.csv"))?);
    w.write_all(header.csv_lines()?.as_bytes())?;
    writeln!(w, "R,deviation,residual,phi2_abs,deviation_envelope,residual_envelope")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            float(r.r),
            float(r.deviation),
            float(r.residual),
            float(r.phi2_abs),
            float(r.deviation_envelope),
            float(r.residual_envelope)
        )?;
    }
    w.flush()?;
    let summary = summarize(&table, &spec)?;
    write_json(&dir.join("deviation_summary.json"), &header, &summary)?;
    println!(
        "{}: slope {:.4} (r2 {:.4}), verdict {:?}, expected {:?}",
        sys.name, summary.slope_fit.slope, summary.slope_fit.r2, summary.verdict, summary.expected
    );
    Ok(0)
}

fn parse_n_range(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::InvalidArgument(format!("--n-range `{s}` is not of the form a..b"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn parse_r_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("--r-grid `{s}`: expected a count or values in (0, 1]"));
    if !s.contains(',') && !s.contains('.') {
        let k: usize = s.trim().parse().map_err(|_| bad())?;
        if k < 2 {
            return Err(bad());
        }
        return Ok((1..=k).map(|i| i as f64 / k as f64).collect());
    }
    let v: Vec<f64> =
        s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    if v.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
        return Err(bad());
    }
    Ok(v)
}

fn limitlaw(
    cli: &Cli,
    f: &Option<Vec<f64>>,
    n_range: &str,
    samples: usize,
    r_grid: &str,
    seed: u64,
    window_factor: f64,
) -> Result<u8> {
    let (n_min, n_max) = parse_n_range(n_range)?;
    let r_grid = parse_r_grid(r_grid)?;
    if window_factor.is_nan() || window_factor < 1.0 {
        return Err(Error::InvalidArgument("--window-factor must be at least 1".into()));
    }
    let l = load(cli)?;
    let f = resolve_f(f, &l)?;
    let spec = spectrum(&l.sys)?;
    let cfg = LimitLawConfig { window_factor, ..LimitLawConfig::new(n_min, n_max, samples, r_grid, seed) };
    let sys = Arc::new(l.sys);
    let (dists, summary) = limitlaw_study(sys.clone(), &spec, &f, &cfg)?;

    let config = json!({ "f": f.c, "limitlaw": cfg });
    let header = Header {
        tool: TOOL,
        command: "limitlaw",
        system: &sys.name,
        config: &config,
        seed: Some(seed),
        spectrum: Some(spec.report()),
    };
    let dir = out_dir(cli)?;
    let mut w = BufWriter::new(fs::File::create(dir.join("limitlaw.csv"))?);
    w.write_all(header.csv_lines()?.as_bytes())?;
    writeln!(w, "n,sample_id,r,value,renormalized")?;
    for d in &dists {
        for id in 0..d.samples.len() {
            for (k, &r) in d.r_grid.iter().enumerate() {
                writeln!(
                    w,
                    "{},{id},{},{},{}",
                    d.n,
                    float(r),
                    float(d.samples[id][k]),
                    float(d.renormalized[id][k])
                )?;
            }
        }
    }
    w.flush()?;
    write_json(&dir.join("limitlaw_summary.json"), &header, &summary)?;
    let last = summary.ks_matrix.len();
    if last >= 2 {
        println!(
            "{}: KS(n={}, n={}) at r=1: {:.4}",
            sys.name,
            summary.ns[last - 2],
            summary.ns[last - 1],
            summary.ks_matrix[last - 2][last - 1]
        );
    } else {
        println!("{}: sampled n={}", sys.name, summary.ns[0]);
    }
    Ok(0)
}
