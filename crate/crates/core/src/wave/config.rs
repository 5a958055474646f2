//! Flat `key = value` simulation config files.
//!
//! ```text
//! ell = 2
//! a = 2
//! b = 10
//! n_sub = 8
//! nodes_per_sub = 22
//! t_final = 30
//! outer_bc = rbc        # or sommerfeld
//! rbc_epsilon = 1e-12   # used when no rbc_kernel file is given
//! record_radii = 10, 6
//! ```
//!
//! `dt` defaults to `courant * min spacing` with `courant` defaulting to
//! [`DEFAULT_COURANT`](super::DEFAULT_COURANT).

use std::path::{Path, PathBuf};

use super::{OuterBc, SimulationConfig, DEFAULT_COURANT};
use crate::error::{Error, Result};

pub const DEFAULT_RBC_EPSILON: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
enum OuterChoice {
    Sommerfeld,
    Rbc,
}

/// Parses a config; a relative `rbc_kernel` path is resolved against `base`.
pub fn parse_config(text: &str, base: Option<&Path>) -> Result<SimulationConfig> {
    let mut ell = None;
    let mut a = None;
    let mut b = None;
    let mut n_sub = None;
    let mut nodes = None;
    let mut dt = None;
    let mut courant = DEFAULT_COURANT;
    let mut t_final = None;
    let mut outer = OuterChoice::Sommerfeld;
    let mut kernel_path: Option<PathBuf> = None;
    let mut rbc_epsilon = DEFAULT_RBC_EPSILON;
    let mut record: Option<Vec<f64>> = None;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!("`{key}`: bad number `{v}`"),
            })
        };
        let int = |v: &str| -> Result<usize> {
            v.parse::<usize>().map_err(|_| Error::Parse {
                line,
                msg: format!("`{key}`: bad integer `{v}`"),
            })
        };
        match key {
            "ell" => ell = Some(int(value)?),
            "a" => a = Some(num(value)?),
            "b" => b = Some(num(value)?),
            "n_sub" => n_sub = Some(int(value)?),
            "nodes_per_sub" => nodes = Some(int(value)?),
            "dt" => dt = Some(num(value)?),
            "courant" | "cfl" => courant = num(value)?,
            "t_final" => t_final = Some(num(value)?),
            "inner_bc" => {
                if value != "sommerfeld" {
                    return Err(Error::Parse {
                        line,
                        msg: format!("inner_bc must be sommerfeld, got `{value}`"),
                    });
                }
            }
            "outer_bc" => {
                outer = match value {
                    "sommerfeld" => OuterChoice::Sommerfeld,
                    "rbc" => OuterChoice::Rbc,
                    o => {
                        return Err(Error::Parse {
                            line,
                            msg: format!("outer_bc must be sommerfeld or rbc, got `{o}`"),
                        })
                    }
                }
            }
            "rbc_kernel" => {
                let p = PathBuf::from(value);
                kernel_path = Some(match base {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p,
                });
            }
            "rbc_epsilon" => rbc_epsilon = num(value)?,
            "record_radii" => {
                record = Some(
                    value
                        .split(',')
                        .map(|s| num(s.trim()))
                        .collect::<Result<Vec<f64>>>()?,
                )
            }
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key `{other}`"),
                })
            }
        }
    }

    let missing = |name: &str| Error::Parse {
        line: 0,
        msg: format!("missing key `{name}`"),
    };
    let ell = ell.ok_or_else(|| missing("ell"))?;
    let a = a.ok_or_else(|| missing("a"))?;
    let b = b.ok_or_else(|| missing("b"))?;
    let n_sub = n_sub.ok_or_else(|| missing("n_sub"))?;
    let nodes = nodes.ok_or_else(|| missing("nodes_per_sub"))?;
    let t_final = t_final.ok_or_else(|| missing("t_final"))?;
    let mut cfg = SimulationConfig::new(ell, a, b, n_sub, nodes, t_final);
    cfg.dt = dt.unwrap_or_else(|| cfg.stable_dt(courant));
    if let Some(r) = record {
        cfg.record_radii = r;
    }
    if outer == OuterChoice::Rbc {
        let kernel = match kernel_path {
            Some(p) => crate::io::load_table(&p)?,
            None => crate::compress::compress_omega(ell, b, rbc_epsilon)?,
        };
        cfg.outer_bc = OuterBc::Rbc(kernel);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Renders the resolved config in the same format.
pub fn render_config(cfg: &SimulationConfig) -> String {
    let mut s = String::new();
    let mut put = |k: &str, v: String| {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(&v);
        s.push('\n');
    };
    put("ell", cfg.ell.to_string());
    put("a", cfg.a.to_string());
    put("b", cfg.b.to_string());
    put("n_sub", cfg.n_sub.to_string());
    put("nodes_per_sub", cfg.nodes_per_sub.to_string());
    put("dt", format!("{:e}", cfg.dt));
    put("t_final", cfg.t_final.to_string());
    put("inner_bc", "sommerfeld".into());
    match &cfg.outer_bc {
        OuterBc::Sommerfeld => put("outer_bc", "sommerfeld".into()),
        OuterBc::Rbc(k) => {
            put("outer_bc", "rbc".into());
            put("# rbc_kernel_d", k.d().to_string());
            put("# rbc_kernel_epsilon", format!("{:e}", k.epsilon_achieved));
        }
    }
    put(
        "record_radii",
        cfg.record_radii
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(", "),
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let text = "ell = 2\na = 2 # inner\nb = 10\nn_sub = 4\nnodes_per_sub = 12\nt_final = 3\n\
                    outer_bc = rbc\nrecord_radii = 10, 2\n";
        let cfg = parse_config(text, None).unwrap();
        assert_eq!(cfg.record_radii, vec![10.0, 2.0]);
        assert!(matches!(cfg.outer_bc, OuterBc::Rbc(ref k) if k.d() == 2));
        let again = parse_config(&render_config(&cfg), None).unwrap();
        assert_eq!(again.dt, cfg.dt);
        assert_eq!(again.outer_bc, cfg.outer_bc);
    }

    #[test]
    fn errors_name_the_line() {
        let err = parse_config("ell = 2\nspeed = 3\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_config("ell = two\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(parse_config("ell = 2\n", None).is_err());
    }
}
