// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "bbca/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

namespace bbca {

namespace {

using nlohmann::json;

void expect_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        throw ConfigError(path, "expected an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
            throw ConfigError(path + "." + key, "unknown field");
        }
    }
}

std::uint64_t uint_field(const json& obj, const std::string& path, const char* key, std::optional<std::uint64_t> fallback,
                         std::uint64_t min = 0, std::uint64_t max = std::numeric_limits<std::uint64_t>::max()) {
    const std::string here = path + "." + key;
    if (!obj.contains(key)) {
        if (!fallback) {
            throw ConfigError(here, "required field missing");
        }
        return *fallback;
    }
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw ConfigError(here, "expected a non-negative integer");
    }
    const auto x = v.get<std::uint64_t>();
    if (x < min || x > max) {
        throw ConfigError(here, "must be in [" + std::to_string(min) + ", " + std::to_string(max) + "]");
    }
    return x;
}

bool bool_field(const json& obj, const std::string& path, const char* key, bool fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj.at(key).is_boolean()) {
        throw ConfigError(path + "." + key, "expected a boolean");
    }
    return obj.at(key).get<bool>();
}

std::string string_field(const json& obj, const std::string& path, const char* key, std::optional<std::string> fallback) {
    if (!obj.contains(key)) {
        if (!fallback) {
            throw ConfigError(path + "." + key, "required field missing");
        }
        return *fallback;
    }
    if (!obj.at(key).is_string()) {
        throw ConfigError(path + "." + key, "expected a string");
    }
    return obj.at(key).get<std::string>();
}

const json& array_field(const json& obj, const std::string& path, const char* key) {
    static const json empty = json::array();
    if (!obj.contains(key)) {
        return empty;
    }
    if (!obj.at(key).is_array()) {
        throw ConfigError(path + "." + key, "expected an array");
    }
    return obj.at(key);
}

void parse_network(const json& j, const std::string& path, DelayModel& d) {
    expect_object(j, path, {"gst", "delta_post", "min_delay", "pre_gst"});
    d.gst = uint_field(j, path, "gst", 0);
    d.delta_post = uint_field(j, path, "delta_post", 10, 1);
    d.min_delay = uint_field(j, path, "min_delay", 1, 1, d.delta_post);
    d.pre_gst = PreGstPolicy::Adversarial;
    d.pre_gst_bound = d.delta_post;
    if (j.contains("pre_gst")) {
        const std::string p = path + ".pre_gst";
        const auto& pre = j.at("pre_gst");
        expect_object(pre, p, {"policy", "bound"});
        const auto policy = string_field(pre, p, "policy", std::string("adversarial"));
        if (policy == "adversarial") {
            d.pre_gst = PreGstPolicy::Adversarial;
        } else if (policy == "drop_until_gst") {
            d.pre_gst = PreGstPolicy::DropUntilGst;
        } else {
            throw ConfigError(p + ".policy", "expected \"adversarial\" or \"drop_until_gst\"");
        }
        d.pre_gst_bound = uint_field(pre, p, "bound", d.delta_post, d.min_delay);
    }
}

void parse_explore(const json& j, const std::string& path, ExploreSettings& e) {
    expect_object(j, path, {"mode", "case", "probe_choices", "dedupe", "max_leaves"});
    e.mode = string_field(j, path, "mode", std::string("chain"));
    if (e.mode != "chain" && e.mode != "bbca") {
        throw ConfigError(path + ".mode", "expected \"chain\" or \"bbca\"");
    }
    const auto c = string_field(j, path, "case", std::string("correct"));
    const auto parsed = parse_bbca_case(c);
    if (!parsed) {
        throw ConfigError(path + ".case", "unknown case \"" + c + "\"");
    }
    e.bbca_case = *parsed;
    e.probe_choices = bool_field(j, path, "probe_choices", false);
    e.dedupe = bool_field(j, path, "dedupe", false);
    e.max_leaves = uint_field(j, path, "max_leaves", 100'000, 1);
}

}  // namespace

RunConfig parse_config(const json& doc) {
    const std::string root = "$";
    if (doc.is_object() && doc.contains("f")) {
        throw ConfigError("$.f", "f is derived from n and cannot be set");
    }
    expect_object(doc, root,
                  {"n", "seed", "network", "t_max", "stop", "adversary", "payloads", "payload_stream",
                   "censorship_cutoff", "invariants", "explore", "trace", "description"});

    RunConfig cfg;
    cfg.source = doc;
    Scenario& s = cfg.scenario;
    s.n = static_cast<std::uint32_t>(uint_field(doc, root, "n", std::nullopt, 1, 1000));
    const SystemParams params = SystemParams::for_nodes(s.n);
    s.seed = uint_field(doc, root, "seed", 1);
    if (doc.contains("network")) {
        parse_network(doc.at("network"), "$.network", s.delay);
    } else {
        s.delay = DelayModel::uniform(10);
    }
    s.chain.t_max = uint_field(doc, root, "t_max", 10 * s.delay.delta_post, 1);

    if (doc.contains("stop")) {
        const auto& stop = doc.at("stop");
        expect_object(stop, "$.stop", {"max_ticks", "target_view", "max_events"});
        s.max_ticks = uint_field(stop, "$.stop", "max_ticks", 10'000, 1);
        s.target_view = uint_field(stop, "$.stop", "target_view", 0);
        s.max_events = uint_field(stop, "$.stop", "max_events", 5'000'000, 1);
    }

    const auto& adversary = array_field(doc, root, "adversary");
    std::set<std::uint32_t> byzantine;
    for (std::size_t i = 0; i < adversary.size(); ++i) {
        const std::string p = "$.adversary[" + std::to_string(i) + "]";
        const auto& a = adversary[i];
        expect_object(a, p, {"node", "strategy", "max_delay"});
        AdversarySpec spec;
        spec.node = NodeId{static_cast<std::uint32_t>(uint_field(a, p, "node", std::nullopt, 0, s.n - 1))};
        const auto name = string_field(a, p, "strategy", std::nullopt);
        const auto strategy = parse_strategy(name);
        if (!strategy) {
            throw ConfigError(p + ".strategy", "unknown strategy \"" + name + "\"");
        }
        spec.strategy = *strategy;
        spec.max_delay = uint_field(a, p, "max_delay", 0);
        if (!byzantine.insert(spec.node.index).second) {
            throw ConfigError(p + ".node", "node listed twice");
        }
        s.adversary.push_back(spec);
    }
    if (byzantine.size() > params.f) {
        throw ConfigError("$.adversary", std::to_string(byzantine.size()) + " byzantine nodes exceed f = " +
                                             std::to_string(params.f) + " for n = " + std::to_string(s.n));
    }

    const auto& payloads = array_field(doc, root, "payloads");
    for (std::size_t i = 0; i < payloads.size(); ++i) {
        const std::string p = "$.payloads[" + std::to_string(i) + "]";
        expect_object(payloads[i], p, {"node", "tick"});
        PayloadInjection inj;
        inj.node = NodeId{static_cast<std::uint32_t>(uint_field(payloads[i], p, "node", std::nullopt, 0, s.n - 1))};
        inj.tick = uint_field(payloads[i], p, "tick", std::nullopt);
        s.payloads.push_back(inj);
    }
    if (doc.contains("payload_stream")) {
        const std::string p = "$.payload_stream";
        const auto& ps = doc.at("payload_stream");
        expect_object(ps, p, {"every", "start", "until"});
        const Tick every = uint_field(ps, p, "every", std::nullopt, 1);
        const Tick start = uint_field(ps, p, "start", every);
        const Tick until = uint_field(ps, p, "until", std::nullopt);
        std::uint32_t k = 0;
        for (Tick t = start; t <= until; t += every, ++k) {
            s.payloads.push_back(PayloadInjection{NodeId{k % s.n}, t});
        }
    }
    if (doc.contains("censorship_cutoff")) {
        cfg.censorship_cutoff = uint_field(doc, root, "censorship_cutoff", std::nullopt);
    }

    if (doc.contains("invariants")) {
        const auto& inv = array_field(doc, root, "invariants");
        for (std::size_t i = 0; i < inv.size(); ++i) {
            const std::string p = "$.invariants[" + std::to_string(i) + "]";
            if (!inv[i].is_string()) {
                throw ConfigError(p, "expected a string");
            }
            const auto name = inv[i].get<std::string>();
            const auto& known = all_invariants();
            if (std::find(known.begin(), known.end(), name) == known.end()) {
                throw ConfigError(p, "unknown invariant \"" + name + "\"");
            }
            cfg.invariants.insert(name);
        }
    } else {
        cfg.invariants.insert(default_invariants().begin(), default_invariants().end());
    }
    if (cfg.wants("censorship") && !cfg.censorship_cutoff) {
        throw ConfigError("$.censorship_cutoff", "required when the censorship invariant is selected");
    }

    if (doc.contains("explore")) {
        parse_explore(doc.at("explore"), "$.explore", cfg.explore);
    }
    if (doc.contains("trace")) {
        const auto& t = doc.at("trace");
        expect_object(t, "$.trace", {"record_lines"});
        s.record_lines = bool_field(t, "$.trace", "record_lines", false);
    }
    if (doc.contains("description") && !doc.at("description").is_string()) {
        throw ConfigError("$.description", "expected a string");
    }
    s.probe_audit = cfg.wants("complete_adopt");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("$", "cannot read " + path);
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("$", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

}  // namespace bbca
