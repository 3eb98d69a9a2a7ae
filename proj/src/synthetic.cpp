#include "edet/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "edet/errors.hpp"
#include "edet/tensor.hpp"

namespace edet {

Schema synthetic_schema() {
    Schema s;
    s.columns = {"dur",   "sbytes", "dbytes", "sttl",         "dttl",  "sload",
                 "dload", "spkts",  "dpkts",  "ct_state_ttl", "state", "label"};
    s.label_column = "label";
    return s;
}

namespace {

struct ClassProfile {
    double dur, sbytes, dbytes, sload, dload, spkts, dpkts;
    const char* const* states;
    const double* state_cum;
};

constexpr const char* kNormalStates[] = {"FIN", "CON", "ACC", "CLO"};
constexpr double kNormalCum[] = {0.45, 0.75, 0.90, 1.0};
constexpr const char* kAttackStates[] = {"INT", "REQ", "RST", "ECO"};
constexpr double kAttackCum[] = {0.50, 0.75, 0.90, 1.0};

constexpr ClassProfile kNormal = {0.75, 450.0, 500.0, 2.5, 4.0, 18.0, 17.0,
                                  kNormalStates, kNormalCum};
constexpr ClassProfile kAttack = {0.25, 950.0, 480.0, 7.5, 1.8, 46.0, 9.0,
                                  kAttackStates, kAttackCum};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

PacketRecord make_record(Rng& rng, int cls, double spread) {
    const ClassProfile& p = cls ? kAttack : kNormal;
    PacketRecord rec;
    rec.label = cls;
    rec.values.reserve(12);
    rec.values.push_back(fmt(rng.normal(p.dur, 0.18 * spread)));
    rec.values.push_back(fmt(rng.normal(p.sbytes, 120.0 * spread)));
    rec.values.push_back(fmt(rng.normal(p.dbytes, 150.0 * spread)));
    rec.values.push_back(fmt(rng.normal(64.0, 6.0)));
    rec.values.push_back(fmt(rng.normal(60.0, 6.0)));
    rec.values.push_back(fmt(rng.normal(p.sload, 0.8 * spread)));
    rec.values.push_back(fmt(rng.normal(p.dload, 1.0 * spread)));
    rec.values.push_back(fmt(rng.normal(p.spkts, 6.0 * spread)));
    rec.values.push_back(fmt(rng.normal(p.dpkts, 6.0 * spread)));
    rec.values.push_back(fmt(rng.normal(1.5, 0.8)));
    double u = rng.uniform();
    int s = 0;
    while (u > p.state_cum[s])
        ++s;
    rec.values.push_back(p.states[s]);
    rec.values.push_back(cls ? "1" : "0");
    return rec;
}

} // namespace

std::vector<PacketRecord> generate_synthetic(std::size_t n_packets, double attack_fraction,
                                             std::uint64_t seed, double spread) {
    if (n_packets < 1)
        throw SpecError("n_packets must be at least 1");
    if (!(attack_fraction >= 0.0 && attack_fraction <= 1.0))
        throw SpecError("attack_fraction must lie in [0, 1]");
    if (!(spread > 0.0))
        throw SpecError("spread must be positive");

    auto attacks = static_cast<std::size_t>(
        std::llround(static_cast<double>(n_packets) * attack_fraction));
    std::size_t remaining[2] = {n_packets - attacks, attacks};

    Rng rng(seed);
    std::vector<PacketRecord> out;
    out.reserve(n_packets);
    int cls = remaining[0] > 0 ? 0 : 1;
    while (out.size() < n_packets) {
        std::size_t run = std::min(remaining[cls], 1 + rng.below(63));
        for (std::size_t i = 0; i < run; ++i)
            out.push_back(make_record(rng, cls, spread));
        remaining[cls] -= run;
        if (remaining[1 - cls] > 0)
            cls = 1 - cls;
    }
    return out;
}

} // namespace edet
