use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use csv::StringRecord;

use crate::engine::Scenario;
use crate::error::{Error, LoadError, Result};
use crate::geo::{Edge, ModeNetwork, Networks, Node};
use crate::model::{
    Capacity, DemandAgent, GeoPoint, Mode, ModeSet, ScenarioConfig, SinkCategory, SourceType, SupplyAgent,
};

/// A CSV file read into memory with its header index.
struct Sheet {
    path: PathBuf,
    columns: HashMap<String, usize>,
    rows: Vec<(u64, StringRecord)>,
}

impl Sheet {
    fn read(path: &Path, required: &[&str]) -> Result<Self, LoadError> {
        let file = File::open(path).map_err(|source| LoadError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(file);
        let csv_err = |source| LoadError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let columns: HashMap<String, usize> = reader
            .headers()
            .map_err(csv_err)?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim_start_matches('\u{feff}').to_ascii_lowercase(), i))
            .collect();
        if let Some(missing) = required.iter().find(|c| !columns.contains_key(**c)) {
            return Err(LoadError::MissingColumn {
                path: path.to_path_buf(),
                column: missing.to_string(),
            });
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(csv_err)?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            let line = record.position().map_or(0, |p| p.line());
            rows.push((line, record));
        }
        Ok(Self {
            path: path.to_path_buf(),
            columns,
            rows,
        })
    }

    fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        self.rows.iter().map(move |(line, record)| Row {
            sheet: self,
            line: *line,
            record,
        })
    }
}

struct Row<'a> {
    sheet: &'a Sheet,
    line: u64,
    record: &'a StringRecord,
}

impl Row<'_> {
    /// Cell text; empty when the column or cell is absent.
    fn get(&self, column: &str) -> &str {
        self.sheet
            .columns
            .get(column)
            .and_then(|&i| self.record.get(i))
            .unwrap_or("")
    }

    fn error(&self, column: &str, message: impl Into<String>) -> LoadError {
        LoadError::Row {
            path: self.sheet.path.clone(),
            line: self.line,
            column: column.to_string(),
            message: message.into(),
        }
    }

    fn required(&self, column: &str) -> Result<&str, LoadError> {
        match self.get(column) {
            "" => Err(self.error(column, "value is required")),
            v => Ok(v),
        }
    }

    fn parse<T: FromStr>(&self, column: &str) -> Result<T, LoadError>
    where
        T::Err: std::fmt::Display,
    {
        let text = self.required(column)?;
        text.parse()
            .map_err(|e: T::Err| self.error(column, format!("cannot parse `{text}`: {e}")))
    }

    fn parse_opt<T: FromStr>(&self, column: &str) -> Result<Option<T>, LoadError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(column) {
            "" => Ok(None),
            _ => self.parse(column).map(Some),
        }
    }

    fn finite(&self, column: &str) -> Result<f64, LoadError> {
        let v: f64 = self.parse(column)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.error(column, "value must be finite"))
        }
    }

    fn location(&self) -> Result<GeoPoint, LoadError> {
        let lon = self.finite("lon")?;
        let lat = self.finite("lat")?;
        GeoPoint::new(lon, lat).map_err(|e| {
            let column = if matches!(e, crate::error::ModelError::Longitude(_)) { "lon" } else { "lat" };
            self.error(column, e.to_string())
        })
    }

    fn modes(&self, column: &str) -> Result<ModeSet, LoadError> {
        ModeSet::parse_list(self.get(column)).map_err(|e| self.error(column, e.to_string()))
    }

    fn capacity(&self, column: &str) -> Result<Capacity, LoadError> {
        let text = self.get(column);
        if text.is_empty() || text.eq_ignore_ascii_case("inf") {
            return Ok(Capacity::Unlimited);
        }
        let v = self.finite(column)?;
        if v < 0.0 {
            return Err(self.error(column, "capacity must be nonnegative"));
        }
        Ok(Capacity::Finite(v))
    }
}

/// Loads supply agents from `id,type,lon,lat,annual_tonnes[,start_year][,allowed_modes]`.
pub fn load_sources(path: &Path) -> Result<Vec<SupplyAgent>, LoadError> {
    let sheet = Sheet::read(path, &["id", "type", "lon", "lat", "annual_tonnes"])?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(sheet.rows.len());
    for row in sheet.rows() {
        let id = row.required("id")?.to_string();
        if !seen.insert(id.clone()) {
            return Err(row.error("id", format!("duplicate id `{id}`")));
        }
        let source_type: SourceType = row.parse("type")?;
        let location = row.location()?;
        let tonnes = row.finite("annual_tonnes")?;
        if tonnes <= 0.0 {
            return Err(row.error("annual_tonnes", "tonnage must be positive"));
        }
        let mut agent = SupplyAgent::new(id, source_type, location, tonnes);
        agent.start_year = row.parse_opt("start_year")?;
        agent.allowed_modes = row.modes("allowed_modes")?;
        out.push(agent);
    }
    Ok(out)
}

/// Loads demand agents, defaulting a blank storage cost to 10 USD/t.
pub fn load_sinks(path: &Path) -> Result<Vec<DemandAgent>, LoadError> {
    load_sinks_with(path, 10.0)
}

/// Loads demand agents from
/// `id,category,type,lon,lat,cost_per_tonne,annual_capacity,total_capacity,available_year,end_year,allowed_modes`.
///
/// A blank storage cost takes `storage_cost_default`; a blank utilization
/// cost is zero. Pipeline is removed from food-and-beverage sinks.
pub fn load_sinks_with(path: &Path, storage_cost_default: f64) -> Result<Vec<DemandAgent>, LoadError> {
    let sheet = Sheet::read(path, &["id", "category", "lon", "lat", "available_year"])?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(sheet.rows.len());
    for row in sheet.rows() {
        let id = row.required("id")?.to_string();
        if !seen.insert(id.clone()) {
            return Err(row.error("id", format!("duplicate id `{id}`")));
        }
        let category: SinkCategory = row.parse("category")?;
        let mut d = DemandAgent::new(id, category, row.location()?, row.parse("available_year")?);
        if !row.get("type").is_empty() {
            d.sink_type = row.get("type").to_string();
        }
        d.cost_per_tonne = match row.get("cost_per_tonne") {
            "" if category == SinkCategory::Storage => storage_cost_default,
            "" => 0.0,
            _ => row.finite("cost_per_tonne")?,
        };
        if d.cost_per_tonne < 0.0 {
            return Err(row.error("cost_per_tonne", "cost must be nonnegative"));
        }
        d.annual_capacity = row.capacity("annual_capacity")?;
        d.total_capacity = row.capacity("total_capacity")?;
        d.end_year = row.parse_opt("end_year")?;
        if let Some(end) = d.end_year {
            if end < d.available_year {
                return Err(row.error("end_year", format!("end year {end} precedes available year {}", d.available_year)));
            }
        }
        d.allowed_modes = row.modes("allowed_modes")?;
        if d.is_food_grade() && d.allowed_modes.contains(Mode::Pipeline) {
            log::warn!(
                "{}:{}: food-and-beverage sink {} may not use pipelines; removed",
                path.display(),
                row.line,
                d.id
            );
            d.allowed_modes.remove(Mode::Pipeline);
        }
        out.push(d);
    }
    Ok(out)
}

/// Loads one mode's network from `node_id,lon,lat,available_year` and
/// `from,to,miles,available_year`. Blank years mean `first_year`; rail and
/// water elements must all exist from `first_year`.
pub fn load_network(mode: Mode, nodes_path: &Path, edges_path: &Path, first_year: i32) -> Result<ModeNetwork, LoadError> {
    let year_of = |row: &Row<'_>| -> Result<i32, LoadError> {
        let year = row.parse_opt("available_year")?.unwrap_or(first_year);
        if mode != Mode::Pipeline && year > first_year {
            return Err(row.error(
                "available_year",
                format!("{mode} elements must be available from {first_year}, got {year}"),
            ));
        }
        Ok(year.max(first_year))
    };

    let sheet = Sheet::read(nodes_path, &["node_id", "lon", "lat"])?;
    let mut nodes = Vec::with_capacity(sheet.rows.len());
    for row in sheet.rows() {
        nodes.push(Node {
            id: Arc::from(row.required("node_id")?),
            location: row.location()?,
            available_year: year_of(&row)?,
        });
    }

    let sheet = Sheet::read(edges_path, &["from", "to"])?;
    let mut edges = Vec::with_capacity(sheet.rows.len());
    for row in sheet.rows() {
        let miles: Option<f64> = row.parse_opt("miles")?;
        if let Some(m) = miles {
            if !(m.is_finite() && m > 0.0) {
                return Err(row.error("miles", "length must be positive"));
            }
        }
        edges.push(Edge {
            from: row.required("from")?.to_string(),
            to: row.required("to")?.to_string(),
            miles,
            available_year: year_of(&row)?,
        });
    }
    ModeNetwork::new(mode, nodes, edges).map_err(|source| LoadError::Network {
        path: edges_path.to_path_buf(),
        source,
    })
}

/// Loads every input named in `cfg.paths` and checks them against `cfg`.
pub fn load_scenario(cfg: &ScenarioConfig) -> Result<Scenario> {
    let violations = cfg.validate();
    if !violations.is_empty() {
        let msg: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Error::Invalid(msg.join("; ")));
    }
    let need = |p: &Option<PathBuf>, key: &str| {
        p.clone()
            .ok_or_else(|| LoadError::Invalid(format!("scenario is missing `{key}`")))
    };
    let sources = load_sources(&need(&cfg.paths.sources, "sources")?)?;
    let sinks = load_sinks_with(&need(&cfg.paths.sinks, "sinks")?, cfg.econ.storage_cost_default)?;
    let mut networks = Networks::new();
    for mode in Mode::LINE_HAUL {
        let i = mode.index();
        match (&cfg.paths.network_nodes[i], &cfg.paths.network_edges[i]) {
            (Some(n), Some(e)) => networks.insert(load_network(mode, n, e, cfg.first_year)?),
            (None, None) => {}
            _ => {
                return Err(LoadError::Invalid(format!("{mode} network needs both `{mode}_nodes` and `{mode}_edges`")).into())
            }
        }
    }
    if networks.is_empty() {
        log::warn!("scenario has no transport networks; no connection can form");
    }
    Scenario::new(cfg.clone(), sources, sinks, networks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_source_row() {
        let f = file("id,type,lon,lat,annual_tonnes\nS1,Powerplant,-84.3,35.9,1275000\n");
        let s = load_sources(f.path()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].annual_tonnes, 1_275_000.0);
        assert_eq!(s[0].source_type, SourceType::Powerplant);
        assert_eq!(s[0].start_year, None);
        assert_eq!(s[0].allowed_modes, ModeSet::ALL_LINE_HAUL);
    }

    #[test]
    fn header_only_is_empty() {
        let f = file("id,type,lon,lat,annual_tonnes,start_year,allowed_modes\n");
        assert!(load_sources(f.path()).unwrap().is_empty());
    }

    #[test]
    fn unknown_type_names_line_and_column() {
        let f = file("id,type,lon,lat,annual_tonnes\nS1,Powerplants,-84.3,35.9,1275000\n");
        match load_sources(f.path()).unwrap_err() {
            LoadError::Row { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, "type");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn bad_rows_are_rejected() {
        for (row, column) in [
            ("S1,Cement,-200,35,10", "lon"),
            ("S1,Cement,-80,95,10", "lat"),
            ("S1,Cement,-80,35,0", "annual_tonnes"),
            ("S1,Cement,-80,35,-4", "annual_tonnes"),
            ("S1,Cement,-80,35,x", "annual_tonnes"),
        ] {
            let f = file(&format!("id,type,lon,lat,annual_tonnes\nS0,Cement,-80,35,10\n{row}\n"));
            let err = load_sources(f.path()).unwrap_err();
            let msg = err.to_string();
            assert!(msg.contains(":3:") && msg.contains(column), "{msg}");
        }
        let f = file("id,type,lon,lat\n");
        assert!(matches!(load_sources(f.path()), Err(LoadError::MissingColumn { .. })));
        let f = file("id,type,lon,lat,annual_tonnes\nS1,Cement,-80,35,10\nS1,Cement,-80,35,10\n");
        assert!(load_sources(f.path()).unwrap_err().to_string().contains("duplicate"));
    }

    const SINK_HEADER: &str =
        "id,category,type,lon,lat,cost_per_tonne,annual_capacity,total_capacity,available_year,end_year,allowed_modes\n";

    #[test]
    fn sink_defaults_and_sentinels() {
        let f = file(&format!(
            "{SINK_HEADER}D1,Storage,geologic,-90,30,,inf,inf,2025,,\nD2,Utilization,urea,-91,31,,5000,60000,2027,2040,rail\n"
        ));
        let d = load_sinks(f.path()).unwrap();
        assert_eq!(d[0].cost_per_tonne, 10.0);
        assert_eq!(d[0].annual_capacity, Capacity::Unlimited);
        assert_eq!(d[0].total_capacity, Capacity::Unlimited);
        assert_eq!(d[1].cost_per_tonne, 0.0);
        assert_eq!(d[1].annual_capacity, Capacity::Finite(5000.0));
        assert_eq!(d[1].end_year, Some(2040));
        assert_eq!(d[1].allowed_modes, ModeSet::EMPTY.with(Mode::Rail));
    }

    #[test]
    fn food_grade_loses_pipeline() {
        let f = file(&format!(
            "{SINK_HEADER}D1,Utilization,food-and-beverage,-90,30,5,inf,inf,2025,,pipeline|rail\n"
        ));
        let d = load_sinks(f.path()).unwrap();
        assert!(!d[0].allowed_modes.contains(Mode::Pipeline));
        assert!(d[0].allowed_modes.contains(Mode::Rail));
    }

    #[test]
    fn network_rules() {
        let nodes = file("node_id,lon,lat,available_year\nA,-90,30,\nB,-91,30,2030\n");
        let edges = file("from,to,miles,available_year\nA,B,,\n");
        let net = load_network(Mode::Pipeline, nodes.path(), edges.path(), 2025).unwrap();
        assert_eq!(net.node("A").unwrap().available_year, 2025);
        assert_eq!(net.epochs(), &[2025, 2030]);
        let err = load_network(Mode::Rail, nodes.path(), edges.path(), 2025).unwrap_err();
        assert!(err.to_string().contains("available_year"));
        let bad = file("from,to,miles\nA,Z,3\n");
        let nodes = file("node_id,lon,lat\nA,-90,30\n");
        assert!(matches!(
            load_network(Mode::Rail, nodes.path(), bad.path(), 2025),
            Err(LoadError::Network { .. })
        ));
    }
}
