// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

// Times the serial campaign against the OpenMP one on the same seeds and
// checks that both produce the same outcomes.

#include "bbca/campaign.hpp"

#include <omp.h>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    const std::size_t count = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 200;
    const int jobs = argc > 2 ? std::atoi(argv[2]) : omp_get_max_threads();

    const auto config = bbca::parse_config(nlohmann::json{
        {"n", 7},
        {"seed", 1},
        {"network", {{"gst", 150}, {"delta_post", 10}, {"pre_gst", {{"policy", "adversarial"}, {"bound", 80}}}}},
        {"t_max", 60},
        {"stop", {{"max_ticks", 1500}, {"target_view", 8}}},
        {"adversary", {{{"node", 1}, {"strategy", "equivocate_init"}}, {{"node", 4}, {"strategy", "replay"}}}},
    });

    const auto serial = bbca::run_campaign_serial(config, count);
    const auto parallel = bbca::run_campaign(config, count, jobs);
    const bool same = serial.outcomes == parallel.outcomes && serial.combined == parallel.combined;

    std::cout << "seeds            " << count << "\n"
              << "threads          " << jobs << "\n"
              << "serial   seconds " << serial.seconds << "\n"
              << "parallel seconds " << parallel.seconds << "\n"
              << "speedup          " << (parallel.seconds > 0 ? serial.seconds / parallel.seconds : 0) << "\n"
              << "outcomes equal   " << (same ? "yes" : "NO") << "\n"
              << "failures         " << parallel.failures << "\n";
    return same ? 0 : 1;
}
