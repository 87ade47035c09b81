#pragma once

#include "rpi/errors.hpp"
#include "rpi/game.hpp"
#include "rpi/model.hpp"
#include "rpi/policy_iteration.hpp"
#include "rpi/scalar.hpp"

#include <json.hpp>

#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace rpi {

/// Insertion-ordered JSON, so emitted documents have a fixed key order.
using Json = nlohmann::ordered_json;

enum class InstanceKind { rmc, rmdp, game };

inline const char* kind_name(InstanceKind k) {
    switch (k) {
    case InstanceKind::rmc: return "rmc";
    case InstanceKind::rmdp: return "rmdp";
    case InstanceKind::game: return "game";
    }
    return "?";
}

/**
 * A parsed instance file. RMC files fill `rmdp` with one action per state;
 * game files fill `game` only.
 */
template <class Real> struct InstanceFile {
    InstanceKind kind = InstanceKind::rmdp;
    std::optional<Real> gamma;
    RobustMdpInstance<Real> rmdp;
    StochasticGame<Real> game;

    RmcInstance<Real> rmc() const { return induce_rmc(rmdp, AgentPolicy{std::vector<ActionIndex>(rmdp.n, 0)}); }
};

namespace detail {

[[noreturn]] inline void input_error(const std::string& path, const std::string& what) {
    throw InputError((path.empty() ? std::string("/") : path) + ": " + what);
}

inline const Json& member(const Json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) input_error(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) input_error(path, std::string("missing field \"") + key + "\"");
    return *it;
}

template <class Real> Real read_scalar(const Json& j, const std::string& path) {
    Rational exact;
    if (j.is_number_integer()) {
        exact = j.is_number_unsigned() ? Rational(j.get<std::uint64_t>()) : Rational(j.get<std::int64_t>());
    } else if (j.is_number_float()) {
        const double d = j.get<double>();
        if constexpr (!ScalarTraits<Real>::exact) return d;
        exact = rational_from_double(d);
    } else if (j.is_string()) {
        try {
            exact = parse_rational(j.get<std::string>());
        } catch (const Error& e) {
            input_error(path, e.what());
        }
    } else {
        input_error(path, "expected a number or a \"p/q\" string");
    }
    return from_rational<Real>(exact);
}

inline std::size_t read_index(const Json& j, const std::string& path) {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
        input_error(path, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

template <class Real> std::vector<Real> read_scalars(const Json& j, const std::string& path) {
    if (!j.is_array()) input_error(path, "expected an array");
    std::vector<Real> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_scalar<Real>(j[i], path + "/" + std::to_string(i)));
    return out;
}

inline std::vector<std::size_t> read_indices(const Json& j, const std::string& path) {
    if (!j.is_array()) input_error(path, "expected an array");
    std::vector<std::size_t> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_index(j[i], path + "/" + std::to_string(i)));
    return out;
}

template <class Real> LInfBall<Real> read_ball(const Json& j, const std::string& path) {
    LInfBall<Real> ball;
    ball.support = read_indices(member(j, "support", path), path + "/support");
    ball.nominal = read_scalars<Real>(member(j, "nominal", path), path + "/nominal");
    ball.radius = read_scalar<Real>(member(j, "delta", path), path + "/delta");
    return ball;
}

inline std::size_t key_index(const std::string& key, const std::string& path) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), value);
    if (key.empty() || ec != std::errc{} || ptr != key.data() + key.size())
        input_error(path, "object key \"" + key + "\" is not a state index");
    return value;
}

template <class Real> Json scalar_json(const Real& x) {
    if constexpr (ScalarTraits<Real>::exact)
        return to_string(x);
    else
        return x;
}

template <class Real> Json scalars_json(const std::vector<Real>& xs) {
    Json out = Json::array();
    for (const auto& x : xs) out.push_back(scalar_json(x));
    return out;
}

template <class Real> Json ball_json(const LInfBall<Real>& ball) {
    Json out = Json::object();
    out["support"] = ball.support;
    out["nominal"] = scalars_json(ball.nominal);
    out["delta"] = scalar_json(ball.radius);
    return out;
}

} // namespace detail

/// Builds a model from a parsed document. Errors carry the JSON pointer of the offending value.
template <class Real> InstanceFile<Real> parse_instance(const Json& doc) {
    using namespace detail;
    InstanceFile<Real> out;
    const Json& kind = member(doc, "kind", "");
    if (!kind.is_string()) input_error("/kind", "expected a string");
    const auto name = kind.get<std::string>();
    if (name == "rmc")
        out.kind = InstanceKind::rmc;
    else if (name == "rmdp")
        out.kind = InstanceKind::rmdp;
    else if (name == "game")
        out.kind = InstanceKind::game;
    else
        input_error("/kind", "unknown kind \"" + name + "\"");

    const std::size_t n = read_index(member(doc, "n", ""), "/n");
    if (doc.contains("gamma")) out.gamma = read_scalar<Real>(doc["gamma"], "/gamma");
    auto cost = read_scalars<Real>(member(doc, "cost", ""), "/cost");

    if (out.kind == InstanceKind::game) {
        auto& g = out.game;
        g.n = n;
        g.cost = std::move(cost);
        g.s1 = read_indices(member(doc, "s1", ""), "/s1");
        g.s2 = read_indices(member(doc, "s2", ""), "/s2");
        g.sr = read_indices(member(doc, "sr", ""), "/sr");
        if (doc.contains("succ")) {
            const Json& succ = doc["succ"];
            if (!succ.is_object()) input_error("/succ", "expected an object");
            for (const auto& [key, value] : succ.items())
                g.succ[key_index(key, "/succ")] = read_indices(value, "/succ/" + key);
        }
        if (doc.contains("p")) {
            const Json& p = doc["p"];
            if (!p.is_object()) input_error("/p", "expected an object");
            for (const auto& [key, value] : p.items()) g.p[key_index(key, "/p")] = read_scalars<Real>(value, "/p/" + key);
        }
        return out;
    }

    const Json& states = member(doc, "states", "");
    if (!states.is_array()) input_error("/states", "expected an array");
    auto& m = out.rmdp;
    m.n = n;
    m.cost = std::move(cost);
    for (std::size_t s = 0; s < states.size(); ++s) {
        const std::string path = "/states/" + std::to_string(s);
        const Json& st = states[s];
        std::vector<LInfBall<Real>> actions;
        if (st.is_object() && st.contains("actions")) {
            const Json& acts = st["actions"];
            if (!acts.is_array()) input_error(path + "/actions", "expected an array");
            for (std::size_t a = 0; a < acts.size(); ++a)
                actions.push_back(read_ball<Real>(acts[a], path + "/actions/" + std::to_string(a)));
            if (out.kind == InstanceKind::rmc && actions.size() != 1)
                input_error(path + "/actions", "an rmc state has exactly one uncertainty set");
        } else {
            if (out.kind == InstanceKind::rmdp) input_error(path, "missing field \"actions\"");
            actions.push_back(read_ball<Real>(st, path));
        }
        m.actions.push_back(std::move(actions));
    }
    return out;
}

/// Parses JSON text; syntax errors report the byte offset.
template <class Real> InstanceFile<Real> parse_instance_text(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError("byte " + std::to_string(e.byte) + ": " + e.what());
    }
    return parse_instance<Real>(doc);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class Real> InstanceFile<Real> load_instance(const std::string& path) {
    try {
        return parse_instance_text<Real>(read_file(path));
    } catch (const InputError& e) {
        if (std::string(e.what()).rfind(path, 0) == 0) throw;
        throw InputError(path + ":" + e.what());
    }
}

template <class Real> Json to_json(const RobustMdpInstance<Real>& m, const std::optional<Real>& gamma) {
    Json doc = Json::object();
    doc["kind"] = "rmdp";
    doc["n"] = m.n;
    if (gamma) doc["gamma"] = detail::scalar_json(*gamma);
    doc["cost"] = detail::scalars_json(m.cost);
    Json states = Json::array();
    for (const auto& acts : m.actions) {
        Json list = Json::array();
        for (const auto& ball : acts) list.push_back(detail::ball_json(ball));
        Json st = Json::object();
        st["actions"] = std::move(list);
        states.push_back(std::move(st));
    }
    doc["states"] = std::move(states);
    return doc;
}

template <class Real> Json to_json(const RmcInstance<Real>& m, const std::optional<Real>& gamma) {
    Json doc = Json::object();
    doc["kind"] = "rmc";
    doc["n"] = m.n;
    if (gamma) doc["gamma"] = detail::scalar_json(*gamma);
    doc["cost"] = detail::scalars_json(m.cost);
    Json states = Json::array();
    for (const auto& ball : m.balls) states.push_back(detail::ball_json(ball));
    doc["states"] = std::move(states);
    return doc;
}

template <class Real> Json to_json(const StochasticGame<Real>& g, const std::optional<Real>& gamma) {
    Json doc = Json::object();
    doc["kind"] = "game";
    doc["n"] = g.n;
    if (gamma) doc["gamma"] = detail::scalar_json(*gamma);
    doc["cost"] = detail::scalars_json(g.cost);
    doc["s1"] = g.s1;
    doc["s2"] = g.s2;
    doc["sr"] = g.sr;
    Json succ = Json::object();
    for (const auto& [s, list] : g.succ) succ[std::to_string(s)] = list;
    doc["succ"] = std::move(succ);
    Json p = Json::object();
    for (const auto& [s, row] : g.p) p[std::to_string(s)] = detail::scalars_json(row);
    doc["p"] = std::move(p);
    return doc;
}

template <class Real> Json to_json(const EnvPolicy<Real>& rho) {
    Json out = Json::array();
    for (const auto& row : rho.rows) out.push_back(detail::scalars_json(row));
    return out;
}

/// Full RMC-PI trace: every evaluated policy with its value and residual.
template <class Real> Json trace_json(const RmcSolveTrace<Real>& trace) {
    Json its = Json::array();
    for (const auto& it : trace.iterations) {
        Json j = Json::object();
        j["env_policy"] = to_json(it.policy);
        j["value"] = detail::scalars_json(it.value);
        j["residual"] = detail::scalar_json(it.residual);
        its.push_back(std::move(j));
    }
    Json doc = Json::object();
    doc["kind"] = "rmc";
    doc["converged"] = trace.converged;
    doc["iterations"] = std::move(its);
    return doc;
}

/// Full RMDP-PI trace: each agent policy with its nested RMC trace.
template <class Real> Json trace_json(const RmdpSolveTrace<Real>& trace) {
    Json its = Json::array();
    for (const auto& it : trace.iterations) {
        Json j = Json::object();
        j["policy"] = it.policy.actions;
        j["value"] = detail::scalars_json(it.value);
        j["inner"] = trace_json(it.inner);
        its.push_back(std::move(j));
    }
    Json doc = Json::object();
    doc["kind"] = "rmdp";
    doc["converged"] = trace.converged;
    doc["iterations"] = std::move(its);
    return doc;
}

/// Serialized form used for every emitted document: two-space indent, trailing newline.
inline std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

} // namespace rpi
