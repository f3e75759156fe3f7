//! Pulls `--<json.path> VALUE` flags out of argv before clap sees them.

const ROOTS: [&str; 7] = ["chain", "ansatz", "optimizer", "mode", "outputs", "seed", "metadata"];

pub type Overrides = Vec<(String, String)>;

/// Splits argv into the arguments clap should parse and the config overrides.
/// Both `--chain.dmi 0.5` and `--chain.dmi=0.5` are accepted.
pub fn split(args: Vec<String>) -> Result<(Vec<String>, Overrides), String> {
    let mut keep = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        if arg == "--" {
            keep.push(arg);
            keep.extend(iter.by_ref());
            break;
        }
        let Some(flag) = arg.strip_prefix("--") else {
            keep.push(arg);
            continue;
        };
        let (path, inline) = match flag.split_once('=') {
            Some((p, v)) => (p.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        let root = path.split('.').next().unwrap_or_default();
        if !ROOTS.contains(&root) {
            keep.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => iter.next().ok_or_else(|| format!("--{path} needs a value"))?,
        };
        overrides.push((path, value));
    }
    Ok((keep, overrides))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn separates_paths_from_flags() {
        let (keep, ov) = split(argv("bin vqe --config c.json --chain.dmi 0.5 --seed=3 --objective fidelity")).unwrap();
        assert_eq!(keep, argv("bin vqe --config c.json --objective fidelity"));
        assert_eq!(ov, vec![("chain.dmi".into(), "0.5".into()), ("seed".into(), "3".into())]);
    }

    #[test]
    fn negative_values_and_missing_values() {
        let (_, ov) = split(argv("bin exact --chain.field -0.25")).unwrap();
        assert_eq!(ov[0].1, "-0.25");
        assert!(split(argv("bin exact --chain.dmi")).is_err());
        let (keep, ov) = split(argv("bin exact -- --chain.dmi 1")).unwrap();
        assert!(ov.is_empty());
        assert_eq!(keep.len(), 5);
    }
}
