//! TOML run configuration: parsing with strict unknown-key rejection,
//! default filling, semantic validation, and materialization into core
//! objects. The full grammar is documented in the repository README.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use outstab_core::{Device, Domain, KReading, Profile, QuadratureSettings, Role, Zone};

/// One configuration problem, with a 1-based line number when the TOML layer
/// can attribute it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

fn issue(message: impl Into<String>) -> ConfigIssue {
    ConfigIssue {
        line: None,
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// the configuration document
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub reaction: ReactionConfig,
    #[serde(default, rename = "actuator")]
    pub actuators: Vec<DeviceConfig>,
    #[serde(default, rename = "sensor")]
    pub sensors: Vec<DeviceConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default = "default_k_reading")]
    pub k_reading: KReadingConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionConfig {
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub label: String,
    /// `[c, d]` on intervals, `[c1, d1, c2, d2]` on rectangles.
    pub zone: Vec<f64>,
    pub profile: ProfileConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs_x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs_y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub cluster: f64,
    pub rank: f64,
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            cluster: 1e-9,
            rank: 1e-10,
            zero: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationConfig {
    /// Clusters carried by the analysis table (always extended to cover every
    /// unstable cluster).
    pub analysis_clusters: usize,
    /// Interval simulation truncation: number of clusters.
    pub simulation_modes: usize,
    /// Rectangle simulation truncation: per-axis mode index cap.
    pub simulation_max_index: u32,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig {
            analysis_clusters: 12,
            simulation_modes: 200,
            simulation_max_index: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub order: usize,
    pub subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            order: 16,
            subdivisions: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KReadingConfig {
    Literal,
    Refined,
}

fn default_k_reading() -> KReadingConfig {
    KReadingConfig::Refined
}

impl From<KReadingConfig> for KReading {
    fn from(value: KReadingConfig) -> Self {
        match value {
            KReadingConfig::Literal => KReading::Literal,
            KReadingConfig::Refined => KReading::Refined,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub x0: InitialStateConfig,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default = "default_time_points")]
    pub time_points: usize,
    #[serde(default)]
    pub feedback: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
}

fn default_sigma() -> f64 {
    1.0
}

fn default_time_points() -> usize {
    400
}

impl SimulationConfig {
    /// Default horizon: 10/σ.
    pub fn horizon(&self) -> f64 {
        self.t_max.unwrap_or(10.0 / self.sigma)
    }

    /// Fit window, defaulting to the late window `[0.2·T, T]`.
    pub fn window(&self) -> (f64, f64) {
        match self.fit_window {
            Some([a, b]) => (a, b),
            None => (0.2 * self.horizon(), self.horizon()),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.time_points.max(2);
        let t_max = self.horizon();
        (0..n)
            .map(|i| t_max * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member: Option<usize>,
    /// `[cluster, member, coefficient]` triples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Interior grid points per axis; 0 = domain-dependent default
    /// (511 on intervals, 63 on rectangles).
    pub resolution: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { resolution: 0 }
    }
}

impl OracleConfig {
    pub fn resolution_for(&self, domain: &Domain) -> Vec<usize> {
        let default = match domain {
            Domain::Interval { .. } => 511,
            Domain::Rectangle { .. } => 63,
        };
        let n = if self.resolution == 0 {
            default
        } else {
            self.resolution
        };
        vec![n; domain.dim()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: ".".into() }
    }
}

// ---------------------------------------------------------------------------
// parsing and serialization
// ---------------------------------------------------------------------------

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

/// Parse and validate a configuration document. Unknown keys are errors, and
/// every semantic violation found is reported, not just the first.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|span| line_of_offset(text, span.start));
        ConfigError {
            issues: vec![ConfigIssue {
                line,
                message: e.message().to_string(),
            }],
        }
    })?;
    let issues = validate(&config);
    if issues.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError { issues })
    }
}

/// Serialize a configuration back to TOML. `parse_config ∘ serialize_config`
/// is the identity on all fields.
pub fn serialize_config(config: &RunConfig) -> String {
    toml::to_string_pretty(config).expect("configurations always serialize")
}

fn validate(config: &RunConfig) -> Vec<ConfigIssue> {
    let mut issues = Vec::new();
    let domain = match build_domain(&config.domain) {
        Ok(d) => Some(d),
        Err(e) => {
            issues.push(e);
            None
        }
    };
    if !config.reaction.k.is_finite() {
        issues.push(issue("reaction.k must be finite"));
    }
    for (name, value) in [
        ("tolerances.cluster", config.tolerances.cluster),
        ("tolerances.rank", config.tolerances.rank),
        ("tolerances.zero", config.tolerances.zero),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            issues.push(issue(format!("{name} must be strictly positive")));
        }
    }
    if config.truncation.analysis_clusters == 0 {
        issues.push(issue("truncation.analysis_clusters must be at least 1"));
    }
    if config.truncation.simulation_modes == 0 {
        issues.push(issue("truncation.simulation_modes must be at least 1"));
    }
    if config.truncation.simulation_max_index == 0 {
        issues.push(issue("truncation.simulation_max_index must be at least 1"));
    }
    if config.quadrature.order == 0 {
        issues.push(issue("quadrature.order must be at least 1"));
    }
    if config.quadrature.subdivisions == 0 {
        issues.push(issue("quadrature.subdivisions must be at least 1"));
    }
    if let Some(domain) = &domain {
        // Devices: structural checks here; containment/overlap checks run
        // through the core validator so the CLI and library agree.
        let mut devices = Vec::new();
        let mut broken = false;
        for (role, list) in [
            (Role::Actuator, &config.actuators),
            (Role::Sensor, &config.sensors),
        ] {
            for dc in list.iter() {
                match build_device(domain, role, dc, None) {
                    Ok(device) => devices.push(device),
                    Err(e) => {
                        issues.push(e);
                        broken = true;
                    }
                }
            }
        }
        if !broken {
            let report = outstab_core::validate_device_set(domain, &devices);
            for violation in report.violations {
                issues.push(issue(violation.to_string()));
            }
        }
    }
    if let Some(sim) = &config.simulation {
        if !(sim.sigma > 0.0) {
            issues.push(issue("simulation.sigma must be strictly positive"));
        }
        if sim.time_points < 2 {
            issues.push(issue("simulation.time_points must be at least 2"));
        }
        if let Some(t) = sim.t_max {
            if !(t > 0.0) {
                issues.push(issue("simulation.t_max must be strictly positive"));
            }
        }
        if let Some([a, b]) = sim.fit_window {
            if !(a >= 0.0 && a < b) {
                issues.push(issue("simulation.fit_window must satisfy 0 ≤ t1 < t2"));
            }
        }
        if let Err(e) = check_x0_shape(&sim.x0) {
            issues.push(e);
        }
    }
    if let Some(oracle) = &config.oracle {
        if oracle.resolution != 0 && oracle.resolution < 16 {
            issues.push(issue("oracle.resolution must be at least 16 (or 0 for the default)"));
        }
    }
    issues
}

fn build_domain(dc: &DomainConfig) -> Result<Domain, ConfigIssue> {
    match dc.kind.as_str() {
        "interval" => {
            if dc.a.is_some() || dc.b.is_some() {
                return Err(issue("domain: `a`/`b` are not allowed for kind = \"interval\""));
            }
            let length = dc
                .length
                .ok_or_else(|| issue("domain: `length` is required for kind = \"interval\""))?;
            Domain::interval(length).map_err(|e| issue(format!("domain: {e}")))
        }
        "rectangle" => {
            if dc.length.is_some() {
                return Err(issue(
                    "domain: `length` is not allowed for kind = \"rectangle\"",
                ));
            }
            let a = dc
                .a
                .ok_or_else(|| issue("domain: `a` is required for kind = \"rectangle\""))?;
            let b = dc
                .b
                .ok_or_else(|| issue("domain: `b` is required for kind = \"rectangle\""))?;
            Domain::rectangle(a, b).map_err(|e| issue(format!("domain: {e}")))
        }
        other => Err(issue(format!(
            "domain: unknown kind \"{other}\" (expected \"interval\" or \"rectangle\")"
        ))),
    }
}

fn build_zone(domain: &Domain, dc: &DeviceConfig) -> Result<Zone, ConfigIssue> {
    let label = &dc.label;
    match (domain.dim(), dc.zone.len()) {
        (1, 2) => Zone::interval(dc.zone[0], dc.zone[1])
            .map_err(|e| issue(format!("device '{label}': {e}"))),
        (2, 4) => Zone::rectangle(dc.zone[0], dc.zone[1], dc.zone[2], dc.zone[3])
            .map_err(|e| issue(format!("device '{label}': {e}"))),
        (dim, got) => Err(issue(format!(
            "device '{label}': zone needs {} numbers on this domain, got {got}",
            2 * dim
        ))),
    }
}

/// Read a two-column CSV (position, value) with strictly increasing
/// positions; no header row.
pub fn read_samples_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), ConfigIssue> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| issue(format!("cannot open '{}': {e}", path.display())))?;
    let mut positions = Vec::new();
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| issue(format!("'{}': {e}", path.display())))?;
        if record.len() != 2 {
            return Err(issue(format!(
                "'{}' row {}: expected 2 columns, got {}",
                path.display(),
                row + 1,
                record.len()
            )));
        }
        let parse = |field: &str| -> Result<f64, ConfigIssue> {
            field.parse::<f64>().map_err(|_| {
                issue(format!(
                    "'{}' row {}: '{}' is not a number",
                    path.display(),
                    row + 1,
                    field
                ))
            })
        };
        positions.push(parse(&record[0])?);
        values.push(parse(&record[1])?);
    }
    Ok((positions, values))
}

fn build_profile(
    domain: &Domain,
    dc: &DeviceConfig,
    base_dir: Option<&Path>,
) -> Result<Profile, ConfigIssue> {
    let label = &dc.label;
    let pc = &dc.profile;
    let forbid = |fields: &[(&str, bool)]| -> Result<(), ConfigIssue> {
        for (name, present) in fields {
            if *present {
                return Err(issue(format!(
                    "device '{label}': profile key `{name}` is not allowed for kind = \"{}\"",
                    pc.kind
                )));
            }
        }
        Ok(())
    };
    match pc.kind.as_str() {
        "constant" => {
            forbid(&[
                ("coeffs", pc.coeffs.is_some()),
                ("coeffs_x", pc.coeffs_x.is_some()),
                ("coeffs_y", pc.coeffs_y.is_some()),
                ("modes", pc.modes.is_some()),
                ("amplitude", pc.amplitude.is_some()),
                ("csv", pc.csv.is_some()),
                ("positions", pc.positions.is_some()),
                ("values", pc.values.is_some()),
            ])?;
            let value = pc
                .value
                .ok_or_else(|| issue(format!("device '{label}': constant profile needs `value`")))?;
            Ok(Profile::Constant { value })
        }
        "polynomial" => {
            forbid(&[
                ("value", pc.value.is_some()),
                ("modes", pc.modes.is_some()),
                ("amplitude", pc.amplitude.is_some()),
                ("csv", pc.csv.is_some()),
                ("positions", pc.positions.is_some()),
                ("values", pc.values.is_some()),
            ])?;
            let axis_coeffs = match domain.dim() {
                1 => {
                    forbid(&[
                        ("coeffs_x", pc.coeffs_x.is_some()),
                        ("coeffs_y", pc.coeffs_y.is_some()),
                    ])?;
                    vec![pc.coeffs.clone().ok_or_else(|| {
                        issue(format!("device '{label}': polynomial profile needs `coeffs`"))
                    })?]
                }
                _ => {
                    forbid(&[("coeffs", pc.coeffs.is_some())])?;
                    let x = pc.coeffs_x.clone().ok_or_else(|| {
                        issue(format!(
                            "device '{label}': polynomial profile needs `coeffs_x` on rectangles"
                        ))
                    })?;
                    let y = pc.coeffs_y.clone().ok_or_else(|| {
                        issue(format!(
                            "device '{label}': polynomial profile needs `coeffs_y` on rectangles"
                        ))
                    })?;
                    vec![x, y]
                }
            };
            Ok(Profile::Polynomial { axis_coeffs })
        }
        "sine_product" => {
            forbid(&[
                ("value", pc.value.is_some()),
                ("coeffs", pc.coeffs.is_some()),
                ("coeffs_x", pc.coeffs_x.is_some()),
                ("coeffs_y", pc.coeffs_y.is_some()),
                ("csv", pc.csv.is_some()),
                ("positions", pc.positions.is_some()),
                ("values", pc.values.is_some()),
            ])?;
            let modes = pc.modes.clone().ok_or_else(|| {
                issue(format!("device '{label}': sine_product profile needs `modes`"))
            })?;
            if modes.len() != domain.dim() {
                return Err(issue(format!(
                    "device '{label}': `modes` needs {} entries on this domain",
                    domain.dim()
                )));
            }
            Ok(Profile::SineProduct {
                modes,
                amplitude: pc.amplitude.unwrap_or(1.0),
            })
        }
        "tabulated" => {
            forbid(&[
                ("value", pc.value.is_some()),
                ("coeffs", pc.coeffs.is_some()),
                ("coeffs_x", pc.coeffs_x.is_some()),
                ("coeffs_y", pc.coeffs_y.is_some()),
                ("modes", pc.modes.is_some()),
                ("amplitude", pc.amplitude.is_some()),
            ])?;
            let (positions, values) = match (&pc.csv, &pc.positions, &pc.values) {
                (Some(path), None, None) => match base_dir {
                    Some(dir) => read_samples_csv(&dir.join(path))?,
                    // Shape-only validation when no filesystem context
                    // exists: a zone-spanning placeholder (the zone bounds
                    // were already validated as lo < hi).
                    None => {
                        let lo = dc.zone.first().copied().unwrap_or(0.0);
                        let hi = dc.zone.get(1).copied().unwrap_or(lo + 1.0);
                        (vec![lo, hi], vec![0.0, 0.0])
                    }
                },
                (None, Some(p), Some(v)) => (p.clone(), v.clone()),
                _ => {
                    return Err(issue(format!(
                        "device '{label}': tabulated profile needs either `csv` or both `positions` and `values`"
                    )))
                }
            };
            Ok(Profile::Tabulated { positions, values })
        }
        other => Err(issue(format!(
            "device '{label}': unknown profile kind \"{other}\""
        ))),
    }
}

fn build_device(
    domain: &Domain,
    role: Role,
    dc: &DeviceConfig,
    base_dir: Option<&Path>,
) -> Result<Device, ConfigIssue> {
    let zone = build_zone(domain, dc)?;
    let profile = build_profile(domain, dc, base_dir)?;
    Ok(Device::new(role, zone, profile, dc.label.clone()))
}

fn check_x0_shape(x0: &InitialStateConfig) -> Result<(), ConfigIssue> {
    match x0.kind.as_str() {
        "eigenfunction" => {
            if x0.cluster.is_none() {
                return Err(issue("simulation.x0: eigenfunction needs `cluster`"));
            }
            Ok(())
        }
        "combination" => {
            if x0.terms.as_ref().map(|t| t.is_empty()).unwrap_or(true) {
                return Err(issue(
                    "simulation.x0: combination needs a non-empty `terms` list",
                ));
            }
            Ok(())
        }
        "tabulated" => {
            let inline = x0.positions.is_some() && x0.values.is_some();
            if x0.csv.is_none() && !inline {
                return Err(issue(
                    "simulation.x0: tabulated needs either `csv` or both `positions` and `values`",
                ));
            }
            Ok(())
        }
        other => Err(issue(format!(
            "simulation.x0: unknown kind \"{other}\" (expected \"eigenfunction\", \"combination\" or \"tabulated\")"
        ))),
    }
}

// ---------------------------------------------------------------------------
// materialization
// ---------------------------------------------------------------------------

/// Core-level objects behind a validated configuration.
#[derive(Debug, Clone)]
pub struct Setup {
    pub domain: Domain,
    pub k: f64,
    pub actuators: Vec<Device>,
    pub sensors: Vec<Device>,
    pub quadrature: QuadratureSettings,
    pub reading: KReading,
}

impl RunConfig {
    /// Build the core objects; `base_dir` anchors relative CSV paths.
    pub fn materialize(&self, base_dir: Option<&Path>) -> Result<Setup, ConfigError> {
        let mut issues = Vec::new();
        let domain = build_domain(&self.domain).map_err(|e| ConfigError { issues: vec![e] })?;
        let mut actuators = Vec::new();
        let mut sensors = Vec::new();
        for dc in &self.actuators {
            match build_device(&domain, Role::Actuator, dc, base_dir) {
                Ok(d) => actuators.push(d),
                Err(e) => issues.push(e),
            }
        }
        for dc in &self.sensors {
            match build_device(&domain, Role::Sensor, dc, base_dir) {
                Ok(d) => sensors.push(d),
                Err(e) => issues.push(e),
            }
        }
        if !issues.is_empty() {
            return Err(ConfigError { issues });
        }
        Ok(Setup {
            domain,
            k: self.reaction.k,
            actuators,
            sensors,
            quadrature: QuadratureSettings {
                order: self.quadrature.order,
                subdivisions: self.quadrature.subdivisions,
            },
            reading: self.k_reading.into(),
        })
    }

    /// Resolve the initial state, reading CSV samples when referenced.
    pub fn initial_state(
        &self,
        base_dir: Option<&Path>,
    ) -> Result<Option<outstab_core::InitialState>, ConfigError> {
        let Some(sim) = &self.simulation else {
            return Ok(None);
        };
        let x0 = &sim.x0;
        let state = match x0.kind.as_str() {
            "eigenfunction" => outstab_core::InitialState::Eigenfunction {
                cluster_index: x0.cluster.unwrap_or(1),
                member: x0.member.unwrap_or(1),
            },
            "combination" => outstab_core::InitialState::Combination {
                terms: x0
                    .terms
                    .clone()
                    .unwrap_or_default()
                    .iter()
                    .map(|[c, m, coeff]| outstab_core::simulate::CombinationTerm {
                        cluster_index: *c as usize,
                        member: *m as usize,
                        coefficient: *coeff,
                    })
                    .collect(),
            },
            "tabulated" => {
                let (positions, values) = match (&x0.csv, &x0.positions, &x0.values) {
                    (Some(path), _, _) => {
                        let dir = base_dir.unwrap_or(Path::new("."));
                        read_samples_csv(&dir.join(path))
                            .map_err(|e| ConfigError { issues: vec![e] })?
                    }
                    (None, Some(p), Some(v)) => (p.clone(), v.clone()),
                    _ => unreachable!("validated at parse time"),
                };
                outstab_core::InitialState::Tabulated { positions, values }
            }
            _ => unreachable!("validated at parse time"),
        };
        Ok(Some(state))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
[domain]
kind = "interval"
length = 1.0

[reaction]
k = 50.0

[[actuator]]
label = "heater"
zone = [0.0, 0.5]
profile = { kind = "constant", value = 1.0 }

[[sensor]]
label = "probe"
zone = [0.0, 1.0]
profile = { kind = "constant", value = 1.0 }
"#;

    #[test]
    fn minimal_config_gets_documented_defaults() {
        let config = parse_config(MINIMAL).unwrap();
        assert_eq!(config.tolerances.cluster, 1e-9);
        assert_eq!(config.tolerances.rank, 1e-10);
        assert_eq!(config.tolerances.zero, 1e-9);
        assert_eq!(config.truncation.analysis_clusters, 12);
        assert_eq!(config.quadrature.order, 16);
        assert_eq!(config.k_reading, KReadingConfig::Refined);
        assert_eq!(config.seed, 0);
        assert!(config.simulation.is_none());
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = MINIMAL.replace("[[actuator]]", "[[actuater]]");
        let err = parse_config(&text).unwrap_err();
        assert!(err.issues[0].message.contains("actuater"), "{err}");

        let text = format!("{MINIMAL}\n[tolerances]\nclutser = 1e-9\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("clutser"));
        assert!(err.issues[0].line.is_some());
    }

    #[test]
    fn containment_error_names_the_device() {
        let text = MINIMAL.replace("zone = [0.0, 0.5]", "zone = [0.9, 1.2]");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("heater"), "{err}");
    }

    #[test]
    fn overlapping_actuators_rejected() {
        let extra = r#"
[[actuator]]
label = "second"
zone = [0.4, 0.7]
profile = { kind = "constant", value = 1.0 }
"#;
        let err = parse_config(&format!("{MINIMAL}{extra}")).unwrap_err();
        assert!(err.to_string().contains("overlap"), "{err}");
    }

    #[test]
    fn profile_kind_cross_field_checks() {
        let text = MINIMAL.replace(
            r#"profile = { kind = "constant", value = 1.0 }"#,
            r#"profile = { kind = "constant", value = 1.0, modes = [2] }"#,
        );
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("modes"), "{err}");

        let text = MINIMAL.replace(
            r#"profile = { kind = "constant", value = 1.0 }"#,
            r#"profile = { kind = "gaussian" }"#,
        );
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("gaussian"), "{err}");
    }

    #[test]
    fn round_trip_is_identity() {
        let config = parse_config(MINIMAL).unwrap();
        let text = serialize_config(&config);
        let again = parse_config(&text).unwrap();
        assert_eq!(config, again);

        // With every optional section present. Top-level scalars must
        // precede the first table header in TOML.
        let full = format!(
            "k_reading = \"literal\"\nseed = 7\n{MINIMAL}\n{}",
            r#"
[tolerances]
cluster = 1e-8
rank = 1e-9
zero = 1e-8

[truncation]
analysis_clusters = 20
simulation_modes = 150
simulation_max_index = 25

[quadrature]
order = 24
subdivisions = 2

[simulation]
x0 = { kind = "combination", terms = [[1, 1, 1.0], [2, 1, 0.5]] }
sigma = 2.0
t_max = 5.0
time_points = 300
feedback = true
fit_window = [1.0, 5.0]

[oracle]
resolution = 255

[output]
dir = "results"
"#
        );
        let config = parse_config(&full).unwrap();
        let again = parse_config(&serialize_config(&config)).unwrap();
        assert_eq!(config, again);
    }

    #[test]
    fn rectangle_domain_and_devices() {
        let text = r#"
[domain]
kind = "rectangle"
a = 1.0
b = 1.0

[reaction]
k = 60.0

[[actuator]]
label = "corner"
zone = [0.0, 0.5, 0.0, 0.5]
profile = { kind = "constant", value = 1.0 }

[[sensor]]
label = "probe"
zone = [0.15, 0.85, 0.25, 0.6]
profile = { kind = "constant", value = 1.0 }
"#;
        let config = parse_config(text).unwrap();
        let setup = config.materialize(None).unwrap();
        assert_eq!(setup.domain.dim(), 2);
        assert_eq!(setup.actuators.len(), 1);

        let bad = text.replace("a = 1.0", "length = 1.0");
        assert!(parse_config(&bad).is_err());
    }

    #[test]
    fn tolerance_sign_checks() {
        let text = format!("{MINIMAL}\n[tolerances]\ncluster = -1e-9\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("cluster"));
    }
}
