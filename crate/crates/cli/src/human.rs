//! Plain-text tables for terminal output.

use serde_json::Value;

fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<String>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = line(headers.iter().map(|h| h.to_string()).collect());
    out.push('\n');
    out.push_str(&line(widths.iter().map(|w| "-".repeat(*w)).collect()));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.clone()));
        out.push('\n');
    }
    out
}

fn s(v: &Value) -> String {
    match v {
        Value::String(t) => t.clone(),
        Value::Null => "-".into(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format!("{f:.1}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

fn f(v: &Value, digits: usize) -> String {
    v.as_f64().map_or_else(|| "-".into(), |x| format!("{x:.digits$}"))
}

fn mega(v: &Value) -> String {
    v.as_f64().map_or_else(|| "-".into(), |x| format!("{:.2}", x / 1e6))
}

fn precision(v: &Value) -> String {
    match (v.get("kind"), v.get("bits")) {
        (Some(Value::String(k)), Some(b)) => match k.as_str() {
            "Binary" => "binary".into(),
            "Ternary" => "ternary".into(),
            "UnsignedInt" => format!("uint{}", s(b)),
            "SignedInt" => format!("int{}", s(b)),
            "Float" => format!("float{}", s(b)),
            _ => format!("fixed{}", s(b)),
        },
        (Some(Value::Object(o)), Some(b)) if o.contains_key("FixedPoint") => format!("fixed{}", s(b)),
        _ => "-".into(),
    }
}

fn folding(v: &Value) -> String {
    format!("{}/{}/{}", s(&v["p"]), s(&v["q"]), s(&v["m"]))
}

pub fn parse(v: &Value) -> String {
    let rows: Vec<Vec<String>> = v["layers"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|l| {
            let out: Vec<String> = l["output"].as_array().into_iter().flatten().map(s).collect();
            let inputs: Vec<String> = l["inputs"].as_array().into_iter().flatten().map(s).collect();
            vec![s(&l["id"]), s(&l["kind"]), s(&l["precision"]), out.join("x"), inputs.join(",")]
        })
        .collect();
    let mut out = format!("network {}\n\n", s(&v["network"]));
    out.push_str(&table(&["layer", "kind", "precision", "output", "inputs"], &rows));
    let diags = v["diagnostics"].as_array().map_or(0, Vec::len);
    out.push_str(&format!("\n{diags} diagnostic(s)\n"));
    for d in v["diagnostics"].as_array().into_iter().flatten() {
        out.push_str(&format!("  {}: {}\n", s(&d["layer"]), d["issue"]));
    }
    out
}

pub fn workload(v: &Value) -> String {
    let rows: Vec<Vec<String>> = v["rows"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|r| {
            let pair = match (r["weight"].is_null(), r["activation"].is_null()) {
                (false, false) => format!("[{}/{}]", precision(&r["weight"]), precision(&r["activation"])),
                _ => "-".into(),
            };
            vec![s(&r["layer"]), s(&r["kind"]), pair, mega(&r["ops"]), s(&r["params"])]
        })
        .collect();
    let mut out = format!("network {}\n\n", s(&v["network"]));
    out.push_str(&table(&["layer", "kind", "W/A", "MOp", "params"], &rows));
    out.push('\n');
    let totals: Vec<Vec<String>> = v["totals"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|t| vec![s(&t["pair"]), mega(&t["ops"]), s(&t["params"])])
        .collect();
    out.push_str(&table(&["precision", "MOp", "params"], &totals));
    out.push_str(&format!(
        "\ntotal {} MOp, {} M parameters\n",
        mega(&v["total_ops"]),
        mega(&v["total_params"])
    ));
    out
}

pub fn passes(v: &Value) -> String {
    let mut out = format!("network {} ({} layers)\n", s(&v["network"]), s(&v["layers"]));
    for e in v["log"].as_array().into_iter().flatten() {
        let list = |k: &str| e[k].as_array().map(|a| a.iter().map(s).collect::<Vec<_>>().join(",")).unwrap_or_default();
        out.push_str(&format!(
            "{:<18} applied={} +[{}] -[{}] ~[{}]\n",
            s(&e["pass"]),
            e["applied"],
            list("added"),
            list("removed"),
            list("modified")
        ));
        for d in e["diagnostics"].as_array().into_iter().flatten() {
            out.push_str(&format!("    {}\n", s(d)));
        }
    }
    out
}

pub fn design(v: &Value) -> String {
    let d = &v["design"];
    let mut out = format!(
        "network {}  platform {}  arch {}  profile {}{}\n",
        s(&d["network"]),
        s(&d["platform"]),
        s(&d["arch"]),
        s(&d["profile"]),
        if d["calibrated"].as_bool() == Some(true) { "" } else { " (uncalibrated)" }
    );
    if !d["engine"].is_null() {
        out.push_str(&format!("engine P/Q/M {}\n", folding(&d["engine"])));
    }
    if let Some(true) = v["fell_back"].as_bool() {
        out.push_str("minimal dataflow folding does not fit; using multilayer offload\n");
    }
    let perf_layers = d["perf"]["layers"].as_array().cloned().unwrap_or_default();
    let rows: Vec<Vec<String>> = d["layers"]
        .as_array()
        .into_iter()
        .flatten()
        .enumerate()
        .map(|(i, l)| {
            let p = perf_layers.get(i).cloned().unwrap_or(Value::Null);
            vec![
                s(&l["layer"]),
                s(&l["kind"]),
                folding(&l["folding"]),
                f(&l["cost"]["luts"], 0),
                s(&l["cost"]["bram18"]),
                s(&l["cost"]["dsps"]),
                f(&p["cycles"], 0),
                s(&p["bound"]),
            ]
        })
        .collect();
    out.push('\n');
    out.push_str(&table(&["layer", "kind", "P/Q/M", "LUTs", "BRAM18", "DSPs", "cycles", "bound"], &rows));
    let t = &d["cost"]["total"];
    let b = &d["budget"];
    out.push_str(&format!(
        "\ntotal   {} LUTs  {} BRAM18  {} DSPs   (budget {} / {} / {})\n",
        f(&t["luts"], 0),
        s(&t["bram18"]),
        s(&t["dsps"]),
        f(&b["luts"], 0),
        s(&b["bram18"]),
        s(&b["dsps"])
    ));
    out.push_str(&format!(
        "LUT band {} .. {}   feasible {}\n",
        f(&d["lut_band"]["low"], 0),
        f(&d["lut_band"]["high"], 0),
        d["feasible"]
    ));
    let perf = &d["perf"];
    out.push_str(&format!(
        "{} fps  {} GOp/s (band {} .. {})  bottleneck {}\n",
        f(&perf["fps"], 1),
        f(&perf["throughput_gops"], 1),
        f(&perf["throughput_band"]["low"], 1),
        f(&perf["throughput_band"]["high"], 1),
        s(&perf["bottleneck"])
    ));
    for w in d["warnings"].as_array().into_iter().flatten() {
        out.push_str(&format!("warning: {}\n", s(w)));
    }
    out
}

pub fn schedule(v: &Value) -> String {
    let sch = &v["schedule"];
    let rows: Vec<Vec<String>> = sch["layers"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|l| {
            vec![
                s(&l["layer"]),
                folding(&l["folding"]),
                s(&l["compute_cycles"]),
                f(&l["weight_transfer_cycles"], 0),
                f(&l["fm_transfer_cycles"], 0),
                f(&l["time_cycles"], 0),
                s(&l["bound"]),
            ]
        })
        .collect();
    let mut out = format!(
        "network {}  platform {}  engine {}\n\n",
        s(&v["network"]),
        s(&v["platform"]),
        folding(&sch["engine"])
    );
    out.push_str(&table(&["layer", "P/Q/M", "compute", "weights", "maps", "time", "bound"], &rows));
    out.push_str(&format!(
        "\nframe {} cycles  utilization {}  {} fps  {} GOp/s\n",
        f(&sch["frame_cycles"], 0),
        f(&sch["utilization"], 3),
        f(&v["perf"]["fps"], 1),
        f(&v["perf"]["throughput_gops"], 1)
    ));
    out
}

pub fn roofline(v: &Value) -> String {
    let mut out = format!("platform {}  clock {} MHz\n", s(&v["platform"]), s(&v["clock_mhz"]));
    for r in v["rooflines"].as_array().into_iter().flatten() {
        out.push_str(&format!(
            "\n[{}/{}] compute roof {} GOp/s, ridge at {} Op/B\n",
            precision(&r["weight"]),
            precision(&r["activation"]),
            f(&r["compute_roof_gops"], 1),
            f(&r["ridge_intensity"], 2)
        ));
        let rows: Vec<Vec<String>> = r["points"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|p| {
                vec![f(&p["intensity"], 3), f(&p["memory_roof_gops"], 1), f(&p["attainable_gops"], 1)]
            })
            .collect();
        out.push_str(&table(&["Op/B", "memory roof", "attainable"], &rows));
    }
    out
}

pub fn sweep(v: &Value) -> String {
    let rows: Vec<Vec<String>> = v["points"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|p| {
            let c = &p["combination"];
            vec![
                s(&c["platform"]),
                format!("{}/{}", precision(&c["weight"]), precision(&c["activation"])),
                s(&c["arch"]),
                s(&p["arch"]),
                f(&p["luts"], 0),
                f(&p["throughput_gops"], 1),
                if p["pareto"].as_bool() == Some(true) { "*".into() } else { String::new() },
                p["error"].as_str().unwrap_or("").to_string(),
            ]
        })
        .collect();
    let mut out = format!("network {}\n\n", s(&v["network"]));
    out.push_str(&table(&["platform", "W/A", "asked", "arch", "LUTs", "GOp/s", "pareto", "error"], &rows));
    out
}

pub fn platforms(v: &Value) -> String {
    let rows: Vec<Vec<String>> = v["platforms"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|p| {
            vec![
                s(&p["name"]),
                s(&p["luts_total"]),
                s(&p["bram18_total"]),
                s(&p["dsp_total"]),
                s(&p["clock_mhz"]),
                s(&p["dram_bandwidth_gbytes"]),
                format!("{}/{}", s(&p["shell"]["luts"]), s(&p["shell"]["bram18"])),
            ]
        })
        .collect();
    table(&["platform", "LUTs", "BRAM18", "DSPs", "MHz", "GB/s", "shell LUT/BRAM"], &rows)
}

pub fn calibration(v: &Value) -> String {
    let rows: Vec<Vec<String>> = v["fits"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|m| {
            vec![
                s(&m["model"]),
                s(&m["records"]),
                f(&m["intercept"], 4),
                f(&m["slope"], 6),
                f(&m["max_relative_error"], 4),
                f(&m["outside_band"], 4),
            ]
        })
        .collect();
    table(&["model", "records", "intercept", "slope", "max rel err", "outside band"], &rows)
}

pub fn tensor(v: &Value) -> String {
    let mut out = String::new();
    for x in v["values"].as_array().into_iter().flatten() {
        out.push_str(&s(x));
        out.push('\n');
    }
    out
}
