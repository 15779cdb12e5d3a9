#include "dropkan/serialize.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace dropkan {

namespace {
constexpr int kFormatVersion = 1;
}

std::string network_to_json(const KanNetwork& net) {
    nlohmann::json doc;
    doc["format"] = "dropkan-model";
    doc["version"] = kFormatVersion;
    doc["architecture"] = net.architecture();
    nlohmann::json layers = nlohmann::json::array();
    for (const KanLayer& l : net.layers) {
        nlohmann::json jl;
        jl["n_in"] = l.n_in;
        jl["n_out"] = l.n_out;
        jl["grid"] = {{"degree", l.grid.degree()},
                      {"intervals", l.grid.intervals()},
                      {"lo", l.grid.lo()},
                      {"hi", l.grid.hi()}};
        jl["drop"] = {{"mode", drop_mode_name(l.drop.mode)},
                      {"rate", l.drop.rate},
                      {"scale", l.drop.scale}};
        nlohmann::json edges = nlohmann::json::array();
        for (const EdgeActivation& e : l.edges)
            edges.push_back({{"w_b", e.w_b}, {"w_s", e.w_s}, {"coeffs", e.coeffs}});
        jl["edges"] = std::move(edges);
        layers.push_back(std::move(jl));
    }
    doc["layers"] = std::move(layers);
    return doc.dump();
}

KanNetwork network_from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.value("format", "") != "dropkan-model")
        throw std::invalid_argument("network_from_json: not a dropkan model document");
    if (doc.value("version", -1) != kFormatVersion)
        throw std::invalid_argument("network_from_json: unsupported format version");

    KanNetwork net;
    for (const nlohmann::json& jl : doc.at("layers")) {
        const nlohmann::json& jg = jl.at("grid");
        EdgeGrid grid(jg.at("degree").get<int>(), jg.at("intervals").get<int>(),
                      jg.at("lo").get<double>(), jg.at("hi").get<double>());
        const nlohmann::json& jd = jl.at("drop");
        DropConfig drop(drop_mode_from_name(jd.at("mode").get<std::string>()),
                        jd.at("rate").get<double>(), jd.at("scale").get<bool>());
        KanLayer layer(jl.at("n_in").get<std::size_t>(), jl.at("n_out").get<std::size_t>(),
                       std::move(grid), drop);
        const nlohmann::json& edges = jl.at("edges");
        if (edges.size() != layer.n_in * layer.n_out)
            throw std::invalid_argument("network_from_json: edge count mismatch");
        for (std::size_t k = 0; k < edges.size(); ++k) {
            EdgeActivation e;
            e.w_b = edges[k].at("w_b").get<double>();
            e.w_s = edges[k].at("w_s").get<double>();
            e.coeffs = edges[k].at("coeffs").get<std::vector<double>>();
            if (e.coeffs.size() != layer.grid.basis_count())
                throw std::invalid_argument("network_from_json: coefficient count mismatch");
            layer.edges[k] = std::move(e);
        }
        net.layers.push_back(std::move(layer));
    }
    if (net.layers.empty()) throw std::invalid_argument("network_from_json: no layers");
    for (std::size_t l = 0; l + 1 < net.layers.size(); ++l)
        if (net.layers[l].n_out != net.layers[l + 1].n_in)
            throw std::invalid_argument("network_from_json: layer dimensions do not chain");

    const auto arch = doc.at("architecture").get<std::vector<std::size_t>>();
    if (arch != net.architecture())
        throw std::invalid_argument("network_from_json: architecture field mismatch");
    return net;
}

void save_network(const KanNetwork& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_network: cannot open " + path);
    out << network_to_json(net) << '\n';
    if (!out) throw std::runtime_error("save_network: write failed for " + path);
}

KanNetwork load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_network: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return network_from_json(text);
}

}  // namespace dropkan
