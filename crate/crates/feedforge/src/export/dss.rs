//! OpenDSS text emitter: a self-contained, solve-ready circuit definition.

use crate::electrify::ElectricalNetwork;
use crate::scalar::Scalar;
use std::fmt::Write;

/// Emits Circuit/Line/Load statements for the network. Line impedances are
/// written per km alongside the length, loads in kW/kvar, and ampacity from
/// the MVA rating at the system base voltage.
pub fn to_opendss<F: Scalar>(net: &ElectricalNetwork<F>) -> String {
    let base_kv = net.base_kv.as_f64();
    let mut out = String::new();
    out.push_str("Clear\n");
    let _ = writeln!(
        out,
        "New Circuit.feeder bus1=bus{} basekv={} pu={} phases=3",
        net.slack_bus,
        base_kv,
        net.slack_v_pu.as_f64()
    );
    out.push('\n');
    for line in &net.lines {
        let len = line.length_km.as_f64();
        let r1 = line.r_ohm.as_f64() / len;
        let x1 = line.x_ohm.as_f64() / len;
        let amps = line.rating_mva.as_f64() * 1000.0 / (3.0f64.sqrt() * base_kv);
        let _ = writeln!(
            out,
            "New Line.line_{from}_{to} bus1=bus{from} bus2=bus{to} r1={r1} x1={x1} length={len} units=km normamps={amps}",
            from = line.from,
            to = line.to,
        );
    }
    out.push('\n');
    for load in &net.loads {
        let _ = writeln!(
            out,
            "New Load.load_{bus} bus1=bus{bus} kV={base_kv} kW={} kvar={} phases=3 model=1",
            load.p_mw.as_f64() * 1000.0,
            load.q_mvar.as_f64() * 1000.0,
            bus = load.bus,
        );
    }
    out.push('\n');
    let _ = writeln!(out, "Set voltagebases=[{base_kv}]");
    out.push_str("Calcvoltagebases\n");
    out.push_str("Solve\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::electrify::testnet::{feeder_from, network_from};

    #[test]
    fn two_bus_net_emits_one_of_each_element() {
        let feeder = feeder_from(&[(1, 2, 100.0, "residential")]);
        let net = network_from(&feeder, 0.1, 2);
        let dss = to_opendss(&net);
        assert_eq!(dss.matches("New Circuit.").count(), 1);
        assert_eq!(dss.matches("New Line.").count(), 1);
        assert_eq!(dss.matches("New Load.").count(), 1);
        assert!(dss.starts_with("Clear\n"));
        assert!(dss.ends_with("Solve\n"));
        assert!(dss.contains("units=km"));
    }

    #[test]
    fn kw_values_sum_to_the_total_in_kw() {
        let feeder = feeder_from(&[
            (1, 2, 100.0, "residential"),
            (2, 3, 120.0, "residential"),
            (3, 4, 90.0, "residential"),
            (2, 5, 110.0, "residential"),
        ]);
        let net = network_from(&feeder, 1.44, 360);
        let dss = to_opendss(&net);
        let mut sum = 0.0f64;
        for line in dss.lines() {
            if let Some(pos) = line.find("kW=") {
                let rest = &line[pos + 3..];
                let token = rest.split_whitespace().next().unwrap();
                sum += token.parse::<f64>().unwrap();
            }
        }
        assert!((sum - 1440.0).abs() < 1e-9, "kW sum {sum}");
    }

    #[test]
    fn zero_load_bus_gets_no_load_statement() {
        // 3 households on 4 non-root buses: one bus ends up with none.
        let feeder = feeder_from(&[
            (1, 2, 100.0, "residential"),
            (2, 3, 100.0, "residential"),
            (3, 4, 100.0, "residential"),
            (4, 5, 100.0, "residential"),
        ]);
        let net = network_from(&feeder, 0.3, 3);
        assert_eq!(net.loads.len(), 3);
        let dss = to_opendss(&net);
        assert_eq!(dss.matches("New Load.").count(), 3);
        let unloaded: Vec<i64> = [2i64, 3, 4, 5]
            .into_iter()
            .filter(|&b| !net.loads.iter().any(|l| l.bus == crate::NodeId(b)))
            .collect();
        assert_eq!(unloaded.len(), 1);
        assert!(!dss.contains(&format!("New Load.load_{}", unloaded[0])));
    }

    #[test]
    fn per_km_impedance_matches_the_template() {
        let feeder = feeder_from(&[(1, 2, 250.0, "residential")]);
        let net = network_from(&feeder, 0.1, 2);
        let dss = to_opendss(&net);
        // r_ohm = 0.642 ohm/km * 0.25 km; emitted r1 is back in ohm/km.
        assert!(dss.contains("r1=0.642 "), "{dss}");
        assert!(dss.contains("length=0.25 "));
    }
}
