use anyhow::{bail, Context};
use serde::Serialize;
use serde_json::{json, Map, Value};

use qlink_core::analytic_model::TABLE3_T_VALUES;
use qlink_core::monte_carlo::{memory_error_for_ratio, DEFAULT_MEMORY_RATIO};
use qlink_core::{
    builtin_codes, cut_costs, cycle_times, default_steane_encoder, inmotion_dqec_cost, recommend,
    serial_penalty_mc, simulate_block_transfer, static_dqec_cycle_cost, table3, table3_stacks,
    teleport_count, CodeStack, CostMethod, EncoderCircuit, FailureQuery, LinkParams, McConfig,
    McEstimate, McSettings, ModelMode, Multiplexing, QecCode, SyndromeSchedule, Thresholds,
    TimingParams, WorkloadSpec,
};

use crate::args::{
    AnalyzeArgs, CircuitArgs, Command, DqecArgs, Format, LinkArgs, LinkTimingArgs, McArgs,
    RecommendArgs, SweepArgs, Table3Args, WorkloadArgs,
};
use crate::report::{opt_sci, sci, Report, Table};

/// Global settings shared by every command.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Globals {
    pub seed: u64,
    pub workers: usize,
    pub mode: ModelMode,
}

pub fn run(command: &Command, g: Globals) -> anyhow::Result<Report> {
    match command {
        Command::Codes => codes(g),
        Command::Analyze(a) => analyze(a, g),
        Command::Table3(a) => table3_cmd(a, g),
        Command::Mc(a) => mc(a, g),
        Command::Sweep(a) => sweep(a, g),
        Command::Cut(a) => cut(a, g),
        Command::DqecCost(a) => dqec_cost(a, g),
        Command::Workload(a) => workload(a, g),
        Command::LinkTiming(a) => link_timing(a, g),
        Command::Recommend(a) => recommend_cmd(a, g),
    }
}

/// `{"command", "config", ...result}`; a non-object result goes under `result`.
fn envelope(name: &str, g: Globals, args: Value, result: Value) -> Value {
    let mut config = Map::new();
    config.insert("seed".into(), json!(g.seed));
    config.insert("workers".into(), json!(g.workers));
    config.insert("mode".into(), json!(g.mode.to_string()));
    if let Value::Object(args) = args {
        config.extend(args);
    }
    let mut out = Map::new();
    out.insert("command".into(), json!(name));
    out.insert("config".into(), Value::Object(config));
    match result {
        Value::Object(fields) => out.extend(fields),
        other => {
            out.insert("result".into(), other);
        }
    }
    Value::Object(out)
}

fn to_value<T: Serialize>(v: &T) -> anyhow::Result<Value> {
    serde_json::to_value(v).context("serializing report")
}

fn warn_deep(stack: &CodeStack) {
    if stack.depth() > 2 {
        eprintln!(
            "warning: {stack} has {} levels; only one and two levels have been cross-checked",
            stack.depth()
        );
    }
}

fn single_code(stack: &CodeStack) -> anyhow::Result<QecCode> {
    match stack.levels() {
        [code] => Ok(code.clone()),
        _ => bail!(qlink_core::Error::InvalidConfig(format!(
            "expected a single code, got stack {stack}"
        ))),
    }
}

fn codes(g: Globals) -> anyhow::Result<Report> {
    let codes = builtin_codes();
    let mut table = Table::new(&["name", "n", "k", "d", "correctable", "min_fail"]);
    for c in &codes {
        table.push(vec![
            c.name().to_string(),
            c.n().to_string(),
            c.k().to_string(),
            c.d().to_string(),
            c.correctable().to_string(),
            c.min_fail().to_string(),
        ]);
    }
    let result = json!({ "codes": to_value(&codes)? });
    Ok(Report {
        default_format: Format::Json,
        json: envelope("codes", g, json!({}), result),
        table,
    })
}

fn analyze(a: &AnalyzeArgs, g: Globals) -> anyhow::Result<Report> {
    warn_deep(&a.stack);
    let workload = match a.bits {
        Some(bits) => Some(teleport_count(WorkloadSpec {
            bits,
            adder: a.adder.unwrap_or(qlink_core::Adder::CarryRipple),
        })?),
        None => None,
    };
    let t = match (a.t, workload) {
        (Some(t), _) => t,
        (None, Some(w)) => w.t,
        (None, None) => bail!(qlink_core::Error::InvalidConfig(
            "analyze needs --t or --bits".into()
        )),
    };
    let query = FailureQuery {
        stack: a.stack.clone(),
        t,
        p_t: a.pt,
        target_pf: a.target_pf,
    };
    let analysis = query.evaluate(g.mode)?;

    let mut table = Table::new(&[
        "stack",
        "scale_up",
        "t",
        "mode",
        "target_pf",
        "allowable_pt",
        "p_t",
        "p_f",
        "linearization_valid",
    ]);
    let at = analysis
        .failure_at_pt
        .unwrap_or(analysis.failure_at_allowable);
    table.push(vec![
        a.stack.to_string(),
        analysis.scale_up.to_string(),
        sci(t),
        g.mode.to_string(),
        sci(a.target_pf),
        sci(analysis.allowable_pt),
        sci(a.pt.unwrap_or(analysis.allowable_pt)),
        sci(at.p_f),
        at.linearization_valid.to_string(),
    ]);

    let mut result = json!({
        "stack": a.stack.to_string(),
        "scale_up": analysis.scale_up,
        "t": t,
        "allowable_pt": analysis.allowable_pt,
        "failure_at_allowable": to_value(&analysis.failure_at_allowable)?,
        "failure_at_pt": to_value(&analysis.failure_at_pt)?,
    });
    if let Some(w) = workload {
        result["workload"] = to_value(&w)?;
    }
    Ok(Report {
        default_format: Format::Json,
        json: envelope("analyze", g, to_value(a)?, result),
        table,
    })
}

fn table3_cmd(a: &Table3Args, g: Globals) -> anyhow::Result<Report> {
    let stacks = match &a.stack {
        Some(s) => {
            warn_deep(s);
            vec![s.clone()]
        }
        None => table3_stacks(),
    };
    let t_values = match a.t {
        Some(t) => vec![t],
        None => TABLE3_T_VALUES.to_vec(),
    };
    let rows = table3(&t_values, &stacks, a.target_pf, &[g.mode])?;
    let mut table = Table::new(&["stack", "scale_up", "t", "mode", "allowable_pt"]);
    for r in &rows {
        table.push(vec![
            r.stack.to_string(),
            r.scale_up.to_string(),
            sci(r.t),
            r.mode.to_string(),
            sci(r.allowable_pt),
        ]);
    }
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "stack": r.stack.to_string(),
                "scale_up": r.scale_up,
                "t": r.t,
                "mode": r.mode.to_string(),
                "allowable_pt": r.allowable_pt,
            })
        })
        .collect();
    let mut config = to_value(a)?;
    config["t_values"] = json!(t_values);
    Ok(Report {
        default_format: Format::Csv,
        json: envelope("table3", g, config, json!({ "rows": rows })),
        table,
    })
}

const MC_HEADER: [&str; 10] = [
    "stack", "mode", "p_t", "p_m", "trials", "failures", "p_hat", "ci_low", "ci_high", "seed",
];

fn mc_row(config: &McConfig, e: &McEstimate) -> Vec<String> {
    vec![
        config.stack.to_string(),
        config.link.multiplexing.to_string(),
        sci(config.link.p_t),
        sci(config.link.p_m),
        e.trials.to_string(),
        e.failures.to_string(),
        sci(e.p_hat),
        sci(e.ci_low),
        sci(e.ci_high),
        e.seed.to_string(),
    ]
}

/// A parallel link with no explicit width gets one lane per physical qubit.
fn link_params(
    stack: &CodeStack,
    multiplexing: Multiplexing,
    lanes: Option<u32>,
    p_t: f64,
    p_m: f64,
) -> LinkParams {
    match multiplexing {
        Multiplexing::Serial => LinkParams::serial(p_t, p_m),
        Multiplexing::Parallel => LinkParams {
            lanes: lanes.unwrap_or_else(|| u32::try_from(stack.scale_up()).unwrap_or(u32::MAX)),
            ..LinkParams::parallel(p_t, p_m)
        },
    }
}

fn chosen_multiplexing(link: &LinkArgs) -> Multiplexing {
    if link.serial {
        Multiplexing::Serial
    } else {
        Multiplexing::Parallel
    }
}

fn mc(a: &McArgs, g: Globals) -> anyhow::Result<Report> {
    warn_deep(&a.stack);
    let config = McConfig {
        stack: a.stack.clone(),
        link: link_params(
            &a.stack,
            chosen_multiplexing(&a.link),
            a.link.lanes,
            a.pt,
            a.pm,
        ),
        trials: a.trials,
        seed: g.seed,
        workers: g.workers,
    };
    let estimate = simulate_block_transfer(&config)?;
    eprintln!(
        "{} trials in {:.3} s",
        estimate.trials,
        estimate.elapsed.as_secs_f64()
    );
    let mut table = Table::new(&MC_HEADER);
    table.push(mc_row(&config, &estimate));
    let mut echo = to_value(&config)?;
    echo["mode"] = json!(g.mode.to_string());
    let mut json = to_value(&estimate)?;
    json["command"] = json!("mc");
    json["config"] = echo;
    Ok(Report {
        default_format: Format::Json,
        json,
        table,
    })
}

fn sweep(a: &SweepArgs, g: Globals) -> anyhow::Result<Report> {
    warn_deep(&a.stack);
    let modes = match (a.serial, a.parallel) {
        (true, false) => vec![Multiplexing::Serial],
        (false, true) => vec![Multiplexing::Parallel],
        _ => vec![Multiplexing::Serial, Multiplexing::Parallel],
    };
    let mut table = Table::new(&MC_HEADER);
    let mut points = Vec::new();
    for &p_t in &a.pt {
        for &p_m in &a.pm {
            for &m in &modes {
                let config = McConfig {
                    stack: a.stack.clone(),
                    link: link_params(&a.stack, m, a.lanes, p_t, p_m),
                    trials: a.trials,
                    seed: g.seed,
                    workers: g.workers,
                };
                let e = simulate_block_transfer(&config)?;
                table.push(mc_row(&config, &e));
                points.push(json!({ "link": to_value(&config.link)?, "estimate": to_value(&e)? }));
            }
        }
    }
    Ok(Report {
        default_format: Format::Csv,
        json: envelope("sweep", g, to_value(a)?, json!({ "points": points })),
        table,
    })
}

fn load_circuit(c: &CircuitArgs) -> anyhow::Result<EncoderCircuit> {
    if c.circuit == "default" {
        Ok(default_steane_encoder())
    } else {
        Ok(EncoderCircuit::from_path(&c.circuit)?)
    }
}

fn cut(a: &CircuitArgs, g: Globals) -> anyhow::Result<Report> {
    let circuit = load_circuit(a)?;
    let costs = cut_costs(&circuit);
    let mut table = Table::new(&["breakpoint", "telegate", "teledata", "direction"]);
    for c in &costs {
        table.push(vec![
            c.breakpoint.clone(),
            c.telegate_eprs.to_string(),
            c.teledata_eprs.to_string(),
            c.teledata_direction.to_string(),
        ]);
    }
    let result = json!({ "n_qubits": circuit.n_qubits(), "cuts": to_value(&costs)? });
    Ok(Report {
        default_format: Format::Csv,
        json: envelope("cut", g, to_value(a)?, result),
        table,
    })
}

fn dqec_cost(a: &DqecArgs, g: Globals) -> anyhow::Result<Report> {
    let circuit = load_circuit(&a.circuit)?;
    let code = match &a.stack {
        Some(stack) => single_code(stack)?,
        None => builtin_codes()
            .into_iter()
            .find(|c| c.n() as usize == circuit.n_qubits())
            .ok_or_else(|| {
                qlink_core::Error::InvalidConfig(format!(
                    "no builtin {}-qubit code; pass --stack",
                    circuit.n_qubits()
                ))
            })?,
    };
    let schedule = SyndromeSchedule::default();
    let telegate = inmotion_dqec_cost(&circuit, CostMethod::Telegate, schedule)?;
    let teledata = inmotion_dqec_cost(&circuit, CostMethod::Teledata, schedule)?;

    let mut table = Table::new(&["quantity", "telegate", "teledata"]);
    table.push(vec![
        "per_syndrome".into(),
        telegate.per_syndrome.to_string(),
        teledata.per_syndrome.to_string(),
    ]);
    table.push(vec![
        "per_cycle".into(),
        telegate.per_cycle.to_string(),
        teledata.per_cycle.to_string(),
    ]);
    table.push(vec![
        "worst_case_block_teleports".into(),
        telegate.worst_case_block_teleports.to_string(),
        teledata.worst_case_block_teleports.to_string(),
    ]);
    let mut statics = Vec::new();
    for cut in circuit.cuts() {
        let tg = static_dqec_cycle_cost(&circuit, &code, cut, schedule, CostMethod::Telegate)?;
        let td = static_dqec_cycle_cost(&circuit, &code, cut, schedule, CostMethod::Teledata)?;
        table.push(vec![
            format!("static_cycle_{}", cut.label()),
            tg.to_string(),
            td.to_string(),
        ]);
        statics.push(json!({ "breakpoint": cut.label(), "telegate": tg, "teledata": td }));
    }
    let mut config = to_value(a)?;
    config["code"] = json!(code.to_string());
    config["schedule"] = to_value(&schedule)?;
    let result = json!({
        "in_motion": { "telegate": to_value(&telegate)?, "teledata": to_value(&teledata)? },
        "static_cycle": statics,
    });
    Ok(Report {
        default_format: Format::Json,
        json: envelope("dqec-cost", g, config, result),
        table,
    })
}

fn workload(a: &WorkloadArgs, g: Globals) -> anyhow::Result<Report> {
    let c = teleport_count(WorkloadSpec {
        bits: a.bits,
        adder: a.adder,
    })?;
    let mut table = Table::new(&[
        "bits",
        "adder",
        "t",
        "t_low",
        "t_high",
        "extrapolated",
        "anchor_bits",
    ]);
    table.push(vec![
        c.bits.to_string(),
        c.adder.to_string(),
        sci(c.t),
        sci(c.t_low),
        sci(c.t_high),
        c.extrapolated.to_string(),
        c.anchor_bits.to_string(),
    ]);
    let mut result = to_value(&c)?;
    result["adder"] = json!(c.adder.to_string());
    Ok(Report {
        default_format: Format::Json,
        json: envelope("workload", g, to_value(a)?, result),
        table,
    })
}

fn link_timing(a: &LinkTimingArgs, g: Globals) -> anyhow::Result<Report> {
    let params = TimingParams {
        lanes: a.lanes,
        ..TimingParams::new(a.tt, a.tlqec, a.n)
    };
    let c = cycle_times(&params)?;
    let mut table = Table::new(&[
        "n",
        "t_t",
        "t_lqec",
        "serial",
        "parallel",
        "slowdown",
        "start_delay_factor",
        "lanes",
        "lanes_cycle",
        "lanes_slowdown",
    ]);
    table.push(vec![
        a.n.to_string(),
        sci(a.tt),
        sci(a.tlqec),
        sci(c.serial),
        sci(c.parallel),
        sci(c.slowdown),
        c.start_delay_factor.to_string(),
        a.lanes.map(|l| l.to_string()).unwrap_or_default(),
        opt_sci(c.multiplexed.map(|m| m.cycle)),
        opt_sci(c.multiplexed.map(|m| m.slowdown)),
    ]);
    Ok(Report {
        default_format: Format::Json,
        json: envelope("link-timing", g, to_value(a)?, to_value(&c)?),
        table,
    })
}

fn recommend_cmd(a: &RecommendArgs, g: Globals) -> anyhow::Result<Report> {
    let code = single_code(&a.stack)?;
    let p_m =
        a.pm.unwrap_or_else(|| memory_error_for_ratio(&code, a.pt, DEFAULT_MEMORY_RATIO));
    let thresholds = Thresholds {
        max_slowdown: a.max_slowdown,
        max_reliability_ratio: a.max_penalty,
    };
    let timing = TimingParams::new(a.tt, a.tlqec, code.n());
    let rec = recommend(&timing, &code, a.pt, p_m, &thresholds)?;
    let mc = match a.trials {
        Some(trials) => Some(serial_penalty_mc(
            &code,
            a.pt,
            p_m,
            McSettings {
                trials,
                seed: g.seed,
                workers: g.workers,
            },
        )?),
        None => None,
    };

    let mut table = Table::new(&[
        "code",
        "p_t",
        "p_m",
        "slowdown",
        "reliability_ratio",
        "choice",
        "triggered_by",
        "mc_ratio",
        "mc_ci_low",
        "mc_ci_high",
    ]);
    let triggered: Vec<String> = rec
        .triggered_by
        .iter()
        .map(|c| to_value(c).map(|v| v.as_str().unwrap_or_default().to_string()))
        .collect::<anyhow::Result<_>>()?;
    table.push(vec![
        code.to_string(),
        sci(a.pt),
        sci(p_m),
        sci(rec.slowdown),
        sci(rec.reliability_ratio),
        rec.choice.to_string(),
        triggered.join(";"),
        opt_sci(mc.as_ref().and_then(|m| m.ratio)),
        opt_sci(mc.as_ref().and_then(|m| m.ci_low)),
        opt_sci(mc.as_ref().and_then(|m| m.ci_high)),
    ]);
    let mut config = to_value(a)?;
    config["pm"] = json!(p_m);
    let mut result = to_value(&rec)?;
    result["choice"] = json!(rec.choice.to_string());
    result["mc"] = to_value(&mc)?;
    Ok(Report {
        default_format: Format::Json,
        json: envelope("recommend", g, config, result),
        table,
    })
}
