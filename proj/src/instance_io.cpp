#include "moma/instance_io.hpp"

#include "moma/errors.hpp"

#include <fstream>

namespace moma {

namespace {

Json header(const StateLattice& lat, double discount, const char* kind) {
    Json j;
    j["format"] = "moma-instance";
    j["version"] = 1;
    j["kind"] = kind;
    j["lower"] = std::vector<Coord>(lat.lower().begin(), lat.lower().end());
    j["upper"] = std::vector<Coord>(lat.upper().begin(), lat.upper().end());
    j["discount"] = discount;
    return j;
}

StateLattice read_header(const Json& j, const char* kind) {
    if (!j.is_object() || j.value("format", "") != "moma-instance")
        throw ConfigError("instance file is not a moma-instance document");
    if (j.value("version", 0) != 1)
        throw ConfigError("unsupported instance version");
    if (j.value("kind", "") != kind)
        throw ConfigError(std::string("instance kind must be '") + kind + "'");
    try {
        return StateLattice(j.at("lower").get<std::vector<Coord>>(),
                            j.at("upper").get<std::vector<Coord>>());
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("instance bounds: ") + e.what());
    }
}

Json row_json(const RowView& r) {
    Json out = Json::array();
    for (std::size_t k = 0; k < r.size(); ++k)
        out.push_back(Json::array({r.cols[k], r.vals[k]}));
    return out;
}

} // namespace

Json export_mrp(const MarkovRewardProcess& mrp) {
    Json j = header(mrp.lattice, mrp.discount, "mrp");
    j["cost"] = mrp.cost;
    Json rows = Json::array();
    for (std::size_t x = 0; x < mrp.size(); ++x)
        rows.push_back(row_json(mrp.P.row(x)));
    j["transitions"] = std::move(rows);
    return j;
}

MarkovRewardProcess import_mrp(const Json& j) {
    StateLattice lat = read_header(j, "mrp");
    try {
        const auto& rows = j.at("transitions");
        if (!rows.is_array() || rows.size() != lat.size())
            throw ConfigError("transitions must list one row per state");
        RowStochasticMatrix::Builder b(lat.size(), lat.size());
        SparseRow row;
        for (const auto& r : rows) {
            row.clear();
            for (const auto& e : r)
                row.add(e.at(0).get<ColIndex>(), e.at(1).get<double>());
            b.append_row(row, 1e-10);
        }
        return MarkovRewardProcess(lat, std::move(b).build(), j.at("cost").get<std::vector<double>>(),
                                   j.at("discount").get<double>());
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed mrp instance: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid mrp instance: ") + e.what());
    }
}

Json export_mdp(const ControlledMdp& mdp) {
    Json j = header(mdp.lattice(), mdp.discount(), "mdp");
    Json states = Json::array();
    SparseRow row;
    for (std::size_t x = 0; x < mdp.size(); ++x) {
        Json acts = Json::array();
        for (std::size_t a = 0; a < mdp.action_count(x); ++a) {
            row.clear();
            mdp.transition(x, static_cast<ActionId>(a), row);
            row.canonicalize();
            Json next = Json::array();
            for (const auto& [c, p] : row.entries())
                next.push_back(Json::array({c, p}));
            Json act;
            act["cost"] = mdp.cost(x, static_cast<ActionId>(a));
            act["next"] = std::move(next);
            acts.push_back(std::move(act));
        }
        states.push_back(std::move(acts));
    }
    j["actions"] = std::move(states);
    return j;
}

std::unique_ptr<TabularMdp> import_mdp(const Json& j) {
    StateLattice lat = read_header(j, "mdp");
    try {
        const auto& states = j.at("actions");
        if (!states.is_array() || states.size() != lat.size())
            throw ConfigError("actions must list one entry per state");
        std::vector<std::vector<TabularMdp::Action>> actions(lat.size());
        for (std::size_t x = 0; x < lat.size(); ++x) {
            for (const auto& a : states[x]) {
                TabularMdp::Action act;
                act.cost = a.at("cost").get<double>();
                for (const auto& e : a.at("next"))
                    act.next.emplace_back(e.at(0).get<StateIndex>(), e.at(1).get<double>());
                actions[x].push_back(std::move(act));
            }
        }
        return std::make_unique<TabularMdp>(lat, std::move(actions), j.at("discount").get<double>());
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed mdp instance: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid mdp instance: ") + e.what());
    }
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace moma
