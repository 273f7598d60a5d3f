#include "pwmstab/corpus.hpp"

namespace pwmstab {

namespace {

RunConfig base(Topology topo, double L, double C, double R, double vs,
               double T, double i_c, double m_c, double rC = 0.0,
               double rL = 0.0) {
    RunConfig cfg;
    cfg.converter.topology = topo;
    cfg.converter.inductance_L = L;
    cfg.converter.capacitance_C = C;
    cfg.converter.load_R = R;
    cfg.converter.source_vs = vs;
    cfg.converter.period_T = T;
    cfg.converter.esr_rC = rC;
    cfg.converter.resistance_rL = rL;
    cfg.control.i_c = i_c;
    cfg.control.m_c = m_c;
    return cfg;
}

} // namespace

std::vector<CorpusEntry> verification_corpus() {
    std::vector<CorpusEntry> out;
    // 12 V, 50 kHz buck around duty 0.40 (no ramp) / 0.41 (ramped).
    out.push_back({"buck_ideal",
                   base(Topology::buck, 50e-6, 100e-6, 5.0, 12.0, 20e-6,
                        1.54, 0.0)});
    out.push_back({"buck_ideal_ramp",
                   base(Topology::buck, 50e-6, 100e-6, 5.0, 12.0, 20e-6,
                        1.9, 4e4)});
    out.push_back({"buck_parasitic",
                   base(Topology::buck, 50e-6, 100e-6, 5.0, 12.0, 20e-6,
                        1.54, 0.0, 0.03, 0.05)});
    out.push_back({"buck_parasitic_ramp",
                   base(Topology::buck, 50e-6, 100e-6, 5.0, 12.0, 20e-6,
                        1.9, 4e4, 0.03, 0.05)});
    // 5 V boost around duty 0.40, output pole fast enough to settle quickly.
    out.push_back({"boost_ideal",
                   base(Topology::boost, 100e-6, 47e-6, 20.0, 5.0, 20e-6,
                        0.89, 0.0)});
    out.push_back({"boost_ideal_ramp",
                   base(Topology::boost, 100e-6, 47e-6, 20.0, 5.0, 20e-6,
                        1.05, 3e4)});
    out.push_back({"boost_parasitic",
                   base(Topology::boost, 100e-6, 47e-6, 20.0, 5.0, 20e-6,
                        0.89, 0.0, 0.05, 0.08)});
    out.push_back({"boost_parasitic_ramp",
                   base(Topology::boost, 100e-6, 47e-6, 20.0, 5.0, 20e-6,
                        1.05, 3e4, 0.05, 0.08)});
    return out;
}

std::vector<CorpusEntry> contraction_trio() {
    std::vector<CorpusEntry> out;
    out.push_back({"contraction_rho04",
                   base(Topology::buck, 50e-6, 4e-6, 2.0, 12.0, 20e-6,
                        2.2, 0.0)});
    out.push_back({"contraction_rho06",
                   base(Topology::buck, 50e-6, 10e-6, 5.0, 12.0, 20e-6,
                        1.2, 0.0)});
    out.push_back({"contraction_rho07",
                   base(Topology::buck, 50e-6, 10e-6, 5.0, 12.0, 20e-6,
                        1.54, 0.0)});
    return out;
}

CorpusEntry gap_demo() {
    // RC = 8 us against T = 20 us: the necessary-condition right side is
    // e^{2.5} ~ 12, so the ratio may exceed 1 by a wide margin while the
    // orbit stays stable.
    return {"gap_lightRC_buck",
            base(Topology::buck, 50e-6, 4e-6, 2.0, 12.0, 20e-6, 3.8, 0.0)};
}

CorpusEntry flip_anchor(double i_c) {
    // 1 mH / 100 kHz: current ripple about 0.025 A on a 0.5 A load, and
    // T/(RC) = 0.01 keeps the damping shift of the boundary tiny.
    return {"flip_anchor_buck",
            base(Topology::buck, 1e-3, 100e-6, 10.0, 10.0, 10e-6, i_c, 0.0)};
}

} // namespace pwmstab
