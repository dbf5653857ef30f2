//! `start:stop:step` range flags, endpoints inclusive within 1e-9.

pub fn parse_density_range(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let number = |t: &str| -> Result<f64, String> {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("invalid number {t:?} in range {text:?}"))
    };
    match parts.as_slice() {
        [single] => {
            let v = number(single)?;
            if v < 0.0 {
                return Err(format!("density {v} is negative"));
            }
            Ok(vec![v])
        }
        [start, stop, step] => {
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if step <= 0.0 {
                return Err(format!("step must be positive in range {text:?}"));
            }
            if start < 0.0 {
                return Err(format!("range start {start} is negative"));
            }
            if stop < start {
                return Err(format!("range {text:?} has stop below start"));
            }
            let mut values = Vec::new();
            let mut i = 0u64;
            loop {
                let v = start + i as f64 * step;
                if v > stop + 1e-9 {
                    break;
                }
                values.push(v.min(stop));
                i += 1;
            }
            Ok(values)
        }
        _ => Err(format!(
            "range {text:?} must be a single value or start:stop:step"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value() {
        assert_eq!(parse_density_range("0.5").unwrap(), vec![0.5]);
    }

    #[test]
    fn inclusive_endpoints() {
        let values = parse_density_range("0:2.5:0.5").unwrap();
        assert_eq!(values, vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5]);
    }

    #[test]
    fn endpoint_within_epsilon_is_kept() {
        // 0.1 steps accumulate float error; 0.3 must still be included
        let values = parse_density_range("0:0.3:0.1").unwrap();
        assert_eq!(values.len(), 4);
        assert!((values[3] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(parse_density_range("1:0:0.1").is_err());
        assert!(parse_density_range("0:1:0").is_err());
        assert!(parse_density_range("a:1:0.1").is_err());
        assert!(parse_density_range("-1").is_err());
    }
}
