//! CSV and JSON rendering of reports, and the matching readers.

use serde::{de::DeserializeOwned, Serialize};

use super::commands::{
    CensusReport, FieldGrid, GridPoint, SpectrumRow, SpectrumTable, StateField, SweepReport,
    SweepSummaryRow,
};
use super::config::OutputFormat;
use super::CliError;
use crate::charges::{state_band, MonopoleRecord};
use crate::spinops::{Coupling, FieldPoint};

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Spectrum(SpectrumTable),
    Grid(FieldGrid),
    Census(CensusReport),
    Sweep(SweepReport),
}

impl Report {
    pub fn render(&self, format: OutputFormat) -> Result<String, CliError> {
        match (self, format) {
            (Report::Spectrum(t), OutputFormat::Json) => to_json(t),
            (Report::Grid(t), OutputFormat::Json) => to_json(t),
            (Report::Census(t), OutputFormat::Json) => to_json(t),
            (Report::Sweep(t), OutputFormat::Json) => to_json(t),
            (Report::Spectrum(t), OutputFormat::Csv) => spectrum_csv(&t.rows),
            (Report::Grid(t), OutputFormat::Csv) => grid_csv(t),
            (Report::Census(t), OutputFormat::Csv) => {
                let g = t.census.coupling;
                records_csv(&t.census.records, &g)
            }
            (Report::Sweep(t), OutputFormat::Csv) => sweep_csv(&t.summary),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(format!("serializing report: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("parsing report: {e}")))
}

type Row = Vec<String>;

fn write_csv(header: Row, rows: impl IntoIterator<Item = Row>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn read_csv(text: &str) -> Result<(Vec<String>, Vec<csv::StringRecord>), CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| CliError::Config(format!("csv header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = r
        .records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(format!("csv: {e}")))?;
    Ok((header, rows))
}

// `{:?}` switches to exponent form for very small and large magnitudes and
// still prints the shortest string that parses back to the same bits
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

struct Cells<'a> {
    header: &'a [String],
    row: &'a csv::StringRecord,
    line: usize,
}

impl Cells<'_> {
    fn raw(&self, name: &str) -> Result<&str, CliError> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("csv: missing column {name}")))?;
        Ok(self.row.get(i).unwrap_or(""))
    }

    fn parse<T: std::str::FromStr>(&self, name: &str) -> Result<T, CliError> {
        let s = self.raw(name)?;
        s.parse().map_err(|_| {
            CliError::Config(format!(
                "csv row {}: column {name}: cannot parse {s:?}",
                self.line
            ))
        })
    }

    fn optional<T: std::str::FromStr>(&self, name: &str) -> Result<Option<T>, CliError> {
        if self.raw(name)?.is_empty() {
            Ok(None)
        } else {
            self.parse(name).map(Some)
        }
    }

    fn vec3(&self, prefix: &str) -> Result<[f64; 3], CliError> {
        Ok([
            self.parse(&format!("{prefix}x"))?,
            self.parse(&format!("{prefix}y"))?,
            self.parse(&format!("{prefix}z"))?,
        ])
    }
}

fn each_row<T>(
    text: &str,
    mut f: impl FnMut(&Cells) -> Result<T, CliError>,
) -> Result<(Vec<String>, Vec<T>), CliError> {
    let (header, rows) = read_csv(text)?;
    let out = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            f(&Cells {
                header: &header,
                row,
                line: i + 2,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok((header, out))
}

const SPECTRUM_HEADER: [&str; 12] = [
    "b_x", "b_y", "b_z", "E1", "E2", "E3", "E4", "gap1", "gap2", "gap3", "gap4", "min_gap",
];

pub fn spectrum_csv(rows: &[SpectrumRow]) -> Result<String, CliError> {
    write_csv(
        SPECTRUM_HEADER.iter().map(|s| s.to_string()).collect(),
        rows.iter().map(|r| {
            let mut row: Row = r.b.iter().chain(&r.energies).map(|&x| num(x)).collect();
            row.extend(r.gaps.iter().map(|g| opt(g.map(num))));
            row.push(num(r.min_gap));
            row
        }),
    )
}

pub fn read_spectrum_csv(text: &str) -> Result<Vec<SpectrumRow>, CliError> {
    each_row(text, |c| {
        Ok(SpectrumRow {
            b: c.vec3("b_")?,
            energies: [
                c.parse("E1")?,
                c.parse("E2")?,
                c.parse("E3")?,
                c.parse("E4")?,
            ],
            gaps: [
                c.optional("gap1")?,
                c.optional("gap2")?,
                c.optional("gap3")?,
                c.optional("gap4")?,
            ],
            min_gap: c.parse("min_gap")?,
        })
    })
    .map(|(_, rows)| rows)
}

fn grid_header(states: &[usize], current: bool) -> Row {
    let mut h: Row = ["u", "v", "b_x", "b_y", "b_z", "min_gap", "masked"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for s in states {
        for c in ["x", "y", "z", "norm", "clipped"] {
            h.push(format!("B{s}_{c}"));
        }
        if current {
            for c in ["x", "y", "z"] {
                h.push(format!("J{s}_{c}"));
            }
        }
    }
    h
}

/// One row per sample point; state columns are empty on masked points.
pub fn grid_csv(grid: &FieldGrid) -> Result<String, CliError> {
    let rows = grid.points.iter().map(|p| {
        let mut r: Row = [p.u, p.v, p.b[0], p.b[1], p.b[2], p.min_gap]
            .iter()
            .map(|&x| num(x))
            .collect();
        r.push(p.masked.to_string());
        for f in &p.fields {
            match f {
                Some(sf) => {
                    r.extend(sf.field.iter().map(|&x| num(x)));
                    r.push(num(sf.norm));
                    r.push(sf.clipped.to_string());
                }
                None => r.extend(std::iter::repeat_n(String::new(), 5)),
            }
            if grid.current {
                let j = f.as_ref().and_then(|sf| sf.current);
                r.extend((0..3).map(|a| opt(j.map(|j| num(j[a])))));
            }
        }
        r
    });
    write_csv(grid_header(&grid.states, grid.current), rows)
}

/// Parses a grid CSV back into its points, the state labels and whether
/// current columns are present.
pub fn read_grid_csv(text: &str) -> Result<(Vec<usize>, bool, Vec<GridPoint>), CliError> {
    let (header, _) = read_csv(text)?;
    let states: Vec<usize> = header
        .iter()
        .filter_map(|h| h.strip_prefix('B')?.strip_suffix("_x")?.parse().ok())
        .collect();
    let current = header.iter().any(|h| h.starts_with('J'));
    if header != grid_header(&states, current) {
        return Err(CliError::Config(format!(
            "csv: unexpected grid header {header:?}"
        )));
    }
    let (_, points) = each_row(text, |c| {
        let fields = states
            .iter()
            .map(|s| -> Result<Option<StateField>, CliError> {
                let p = format!("B{s}_");
                let Some(x) = c.optional::<f64>(&format!("{p}x"))? else {
                    return Ok(None);
                };
                let cur = if current {
                    let j = format!("J{s}_");
                    match c.optional::<f64>(&format!("{j}x"))? {
                        Some(jx) => {
                            Some([jx, c.parse(&format!("{j}y"))?, c.parse(&format!("{j}z"))?])
                        }
                        None => None,
                    }
                } else {
                    None
                };
                Ok(Some(StateField {
                    field: [x, c.parse(&format!("{p}y"))?, c.parse(&format!("{p}z"))?],
                    norm: c.parse(&format!("{p}norm"))?,
                    clipped: c.parse(&format!("{p}clipped"))?,
                    current: cur,
                }))
            })
            .collect::<Result<_, _>>()?;
        Ok(GridPoint {
            u: c.parse("u")?,
            v: c.parse("v")?,
            b: c.vec3("b_")?,
            min_gap: c.parse("min_gap")?,
            masked: c.parse("masked")?,
            fields,
        })
    })?;
    Ok((states, current, points))
}

const RECORD_HEADER: [&str; 11] = [
    "band",
    "state",
    "partner_band",
    "b_x",
    "b_y",
    "b_z",
    "charge",
    "lattice_charge",
    "quantized",
    "residual",
    "sphere_radius",
];

/// State label ψ of a band index.
pub fn band_state(band: usize, g: &Coupling) -> usize {
    (1..=4)
        .find(|&s| state_band(s, g) == band)
        .expect("labels cover every band")
}

pub fn records_csv(records: &[MonopoleRecord], g: &Coupling) -> Result<String, CliError> {
    write_csv(
        RECORD_HEADER.iter().map(|s| s.to_string()).collect(),
        records.iter().map(|r| {
            let mut row = vec![
                r.band.to_string(),
                band_state(r.band, g).to_string(),
                r.partner_band.to_string(),
            ];
            row.extend(
                r.location
                    .0
                    .iter()
                    .chain(
                        [
                            r.charge,
                            r.lattice_charge,
                            r.quantized,
                            r.residual,
                            r.sphere_radius,
                        ]
                        .iter(),
                    )
                    .map(|&x| num(x)),
            );
            row
        }),
    )
}

pub fn read_records_csv(text: &str) -> Result<Vec<MonopoleRecord>, CliError> {
    each_row(text, |c| {
        Ok(MonopoleRecord {
            band: c.parse("band")?,
            location: FieldPoint(c.vec3("b_")?),
            partner_band: c.parse("partner_band")?,
            charge: c.parse("charge")?,
            lattice_charge: c.parse("lattice_charge")?,
            quantized: c.parse("quantized")?,
            residual: c.parse("residual")?,
            sphere_radius: c.parse("sphere_radius")?,
        })
    })
    .map(|(_, r)| r)
}

const SWEEP_HEADER: [&str; 7] = [
    "theta_deg",
    "Q1",
    "Q2",
    "Q3",
    "Q4",
    "grand_total",
    "sum_rule_ok",
];

pub fn sweep_csv(summary: &[SweepSummaryRow]) -> Result<String, CliError> {
    write_csv(
        SWEEP_HEADER.iter().map(|s| s.to_string()).collect(),
        summary.iter().map(|s| {
            let mut row = vec![num(s.theta_deg)];
            row.extend((0..4).map(|i| opt(s.state_totals.map(|t| num(t[i])))));
            row.push(opt(s.grand_total.map(num)));
            row.push(opt(s.sum_rule_ok));
            row
        }),
    )
}

pub fn read_sweep_csv(text: &str) -> Result<Vec<SweepSummaryRow>, CliError> {
    each_row(text, |c| {
        let q: [Option<f64>; 4] = [
            c.optional("Q1")?,
            c.optional("Q2")?,
            c.optional("Q3")?,
            c.optional("Q4")?,
        ];
        Ok(SweepSummaryRow {
            theta_deg: c.parse("theta_deg")?,
            state_totals: match q {
                [Some(a), Some(b), Some(c), Some(d)] => Some([a, b, c, d]),
                _ => None,
            },
            grand_total: c.optional("grand_total")?,
            sum_rule_ok: c.optional("sum_rule_ok")?,
        })
    })
    .map(|(_, r)| r)
}
