#include "tauleap/model.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace tauleap {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ModelError(path + ": " + msg);
}

double number_at(const Json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
}

int integer_at(const Json& j, const std::string& path) {
    double v = number_at(j, path);
    if (v != std::floor(v) || std::fabs(v) > 1e6) fail(path, "expected an integer");
    return static_cast<int>(v);
}

void only_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) fail(path, "expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) fail(path + "." + k, "unknown key");
}

}  // namespace

ReactionNetwork parse_network(std::string_view text) {
    Json doc;
    try {
        doc = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        // The byte offset is mapped to a line number for the diagnostic.
        std::size_t line = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        throw ModelError("line " + std::to_string(line) + ": malformed model file: " + e.what());
    }
    only_keys(doc, "$", {"name", "species", "reactions"});
    if (!doc.contains("species") || !doc["species"].is_array())
        fail("$.species", "expected an array");
    if (!doc.contains("reactions") || !doc["reactions"].is_array())
        fail("$.reactions", "expected an array");

    std::vector<std::string> names;
    std::vector<double> initial;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < doc["species"].size(); ++i) {
        const Json& s = doc["species"][i];
        const std::string path = "$.species[" + std::to_string(i) + "]";
        only_keys(s, path, {"name", "initial"});
        if (!s.contains("name") || !s["name"].is_string()) fail(path + ".name", "expected a string");
        std::string name = s["name"].get<std::string>();
        if (name.empty()) fail(path + ".name", "empty species name");
        if (index.count(name)) fail(path + ".name", "duplicate species '" + name + "'");
        if (!s.contains("initial")) fail(path + ".initial", "missing");
        double v = number_at(s["initial"], path + ".initial");
        if (v < 0 || v != std::floor(v)) fail(path + ".initial", "expected a non-negative integer");
        index[name] = names.size();
        names.push_back(name);
        initial.push_back(v);
    }

    auto lookup = [&](const std::string& name, const std::string& path) {
        auto it = index.find(name);
        if (it == index.end()) fail(path, "unknown species '" + name + "'");
        return it->second;
    };

    std::vector<Reaction> reactions;
    for (std::size_t j = 0; j < doc["reactions"].size(); ++j) {
        const Json& r = doc["reactions"][j];
        const std::string path = "$.reactions[" + std::to_string(j) + "]";
        only_keys(r, path, {"name", "rate", "multiplier", "reactants", "products", "complements"});
        Reaction rx;
        if (!r.contains("rate")) fail(path + ".rate", "missing");
        rx.rate = number_at(r["rate"], path + ".rate");
        if (rx.rate < 0) fail(path + ".rate", "negative rate constant");
        if (r.contains("multiplier")) {
            rx.multiplier = number_at(r["multiplier"], path + ".multiplier");
            if (rx.multiplier < 0) fail(path + ".multiplier", "negative multiplier");
        }
        rx.change.assign(names.size(), 0);
        int total_order = 0;
        if (r.contains("reactants")) {
            if (!r["reactants"].is_object()) fail(path + ".reactants", "expected an object");
            for (const auto& [name, ord] : r["reactants"].items()) {
                const std::string p = path + ".reactants." + name;
                std::size_t s = lookup(name, p);
                int order = integer_at(ord, p);
                if (order < 0 || order > 3) fail(p, "unsupported order " + std::to_string(order));
                total_order += order;
                if (order == 0) continue;
                rx.reactants.push_back({s, order, false, 0.0});
                rx.change[s] -= order;
            }
        }
        if (r.contains("complements")) {
            if (!r["complements"].is_object()) fail(path + ".complements", "expected an object");
            for (const auto& [name, spec] : r["complements"].items()) {
                const std::string p = path + ".complements." + name;
                std::size_t s = lookup(name, p);
                only_keys(spec, p, {"total", "order"});
                if (!spec.contains("total")) fail(p + ".total", "missing");
                double total = number_at(spec["total"], p + ".total");
                if (total < 0) fail(p + ".total", "negative total");
                int order = spec.contains("order") ? integer_at(spec["order"], p + ".order") : 1;
                if (order < 1 || order > 3) fail(p + ".order", "unsupported order " + std::to_string(order));
                total_order += order;
                rx.reactants.push_back({s, order, true, total});
            }
        }
        if (total_order > 3) fail(path, "unsupported order (total " + std::to_string(total_order) + ")");
        if (r.contains("products")) {
            if (!r["products"].is_object()) fail(path + ".products", "expected an object");
            for (const auto& [name, cnt] : r["products"].items()) {
                const std::string p = path + ".products." + name;
                std::size_t s = lookup(name, p);
                int count = integer_at(cnt, p);
                if (count < 0) fail(p, "negative product count");
                rx.change[s] += count;
            }
        }
        reactions.push_back(std::move(rx));
    }
    return ReactionNetwork(std::move(names), std::move(initial), std::move(reactions));
}

std::string serialize_network(const ReactionNetwork& net) {
    Json doc;
    doc["species"] = Json::array();
    for (std::size_t k = 0; k < net.num_species(); ++k)
        doc["species"].push_back({{"name", net.species_names()[k]},
                                  {"initial", static_cast<long long>(net.initial_state()[k])}});
    doc["reactions"] = Json::array();
    for (const Reaction& r : net.reactions()) {
        Json jr;
        jr["rate"] = r.rate;
        if (r.multiplier != 1.0) jr["multiplier"] = r.multiplier;
        Json reactants = Json::object();
        Json complements = Json::object();
        std::vector<int> products = r.change;
        for (const ReactantTerm& t : r.reactants) {
            const std::string& name = net.species_names()[t.species];
            if (t.complement) {
                complements[name] = {{"total", t.total}, {"order", t.order}};
            } else {
                int prev = reactants.contains(name) ? reactants[name].get<int>() : 0;
                reactants[name] = prev + t.order;
                products[t.species] += t.order;
            }
        }
        jr["reactants"] = reactants;
        if (!complements.empty()) jr["complements"] = complements;
        Json prod = Json::object();
        for (std::size_t k = 0; k < products.size(); ++k) {
            if (products[k] < 0)
                throw ModelError("reaction change cannot be written as reactants/products");
            if (products[k] > 0) prod[net.species_names()[k]] = products[k];
        }
        jr["products"] = prod;
        doc["reactions"].push_back(jr);
    }
    return doc.dump(2) + "\n";
}

ReactionNetwork load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open model file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_network(ss.str());
    } catch (const ModelError& e) {
        throw ModelError(path + ": " + e.what());
    }
}

}  // namespace tauleap
