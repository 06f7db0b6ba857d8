#include "gridzones/case_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gridzones/errors.hpp"
#include "gridzones/log.hpp"

namespace gridzones {
namespace {

using json = nlohmann::json;

struct Row {
    std::vector<double> values;
    std::size_t line = 0;
};

struct MatpowerTables {
    std::optional<double> base_mva;
    std::map<std::string, std::vector<Row>> tables;
    std::map<std::string, std::vector<std::string>> cells;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view token, std::size_t line) {
    double value = 0.0;
    std::string_view t = token;
    if (!t.empty() && t.front() == '+') t.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw ParseError(fmt::format("non-numeric value '{}'", token), line);
    return value;
}

void parse_table_segment(std::string_view segment, std::size_t line, std::vector<Row>& rows) {
    std::size_t start = 0;
    while (start <= segment.size()) {
        auto end = segment.find(';', start);
        if (end == std::string_view::npos) end = segment.size();
        auto piece = trim(segment.substr(start, end - start));
        if (!piece.empty()) {
            Row row;
            row.line = line;
            std::size_t i = 0;
            while (i < piece.size()) {
                while (i < piece.size() && (std::isspace(static_cast<unsigned char>(piece[i])) || piece[i] == ','))
                    ++i;
                std::size_t j = i;
                while (j < piece.size() && !std::isspace(static_cast<unsigned char>(piece[j])) && piece[j] != ',')
                    ++j;
                if (j > i) row.values.push_back(parse_number(piece.substr(i, j - i), line));
                i = j;
            }
            rows.push_back(std::move(row));
        }
        start = end + 1;
    }
}

void parse_cell_segment(std::string_view segment, std::size_t line, std::vector<std::string>& cells) {
    std::size_t i = 0;
    while ((i = segment.find_first_of("'\"", i)) != std::string_view::npos) {
        char quote = segment[i];
        auto close = segment.find(quote, i + 1);
        if (close == std::string_view::npos) throw ParseError("unterminated string in cell array", line);
        cells.emplace_back(segment.substr(i + 1, close - i - 1));
        i = close + 1;
    }
}

MatpowerTables scan_matpower(std::string_view text) {
    MatpowerTables out;
    enum class Mode { none, table, cell } mode = Mode::none;
    std::string current;
    std::size_t opened_at = 0;
    std::size_t line_no = 0;
    std::size_t pos = 0;

    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (auto pct = line.find('%'); pct != std::string_view::npos) line = line.substr(0, pct);
        line = trim(line);
        if (line.empty()) {
            if (nl == text.size()) break;
            continue;
        }

        if (mode == Mode::none) {
            if (!line.starts_with("mpc.")) continue;
            auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ParseError("expected '=' after field name", line_no);
            current = std::string(trim(line.substr(4, eq - 4)));
            auto rest = trim(line.substr(eq + 1));
            if (rest.starts_with("[")) {
                mode = Mode::table;
                opened_at = line_no;
                out.tables[current];
                line = rest.substr(1);
            } else if (rest.starts_with("{")) {
                mode = Mode::cell;
                opened_at = line_no;
                out.cells[current];
                line = rest.substr(1);
            } else {
                if (current == "baseMVA") {
                    auto semi = rest.find(';');
                    out.base_mva = parse_number(trim(rest.substr(0, semi)), line_no);
                }
                continue;
            }
        }

        if (mode == Mode::table) {
            auto close = line.find(']');
            parse_table_segment(line.substr(0, close), line_no, out.tables[current]);
            if (close != std::string_view::npos) mode = Mode::none;
        } else if (mode == Mode::cell) {
            auto close = line.find('}');
            parse_cell_segment(line.substr(0, close), line_no, out.cells[current]);
            if (close != std::string_view::npos) mode = Mode::none;
        }
        if (nl == text.size()) break;
    }
    if (mode != Mode::none)
        throw ParseError(fmt::format("table mpc.{} is never closed", current), opened_at);
    return out;
}

const std::vector<Row>& require_table(const MatpowerTables& t, const std::string& name) {
    auto it = t.tables.find(name);
    if (it == t.tables.end()) throw ParseError("missing table mpc." + name);
    return it->second;
}

void require_columns(const Row& row, std::size_t n, const std::string& table) {
    if (row.values.size() < n)
        throw ParseError(fmt::format("mpc.{} row has {} columns, need at least {}", table, row.values.size(), n),
                         row.line);
}

std::string integer_label(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) return fmt::format("{}", static_cast<long long>(v));
    return fmt::format("{}", v);
}

// Marginal cost at p_max of a MATPOWER gencost row.
double marginal_cost(const Row& row, double p_max, std::size_t gen_index, int& reduced) {
    require_columns(row, 4, "gencost");
    const int model = static_cast<int>(row.values[0]);
    const auto ncost = static_cast<std::size_t>(row.values[3]);
    require_columns(row, 4 + (model == 1 ? 2 * ncost : ncost), "gencost");
    const double* c = row.values.data() + 4;

    if (model == 2) {
        if (ncost == 0) return 0.0;
        if (ncost <= 2) return ncost == 2 ? c[0] : 0.0;
        // c[0] x^(n-1) + ... + c[n-1]; derivative at p_max
        double d = 0.0;
        for (std::size_t i = 0; i + 1 < ncost; ++i) {
            const auto power = static_cast<double>(ncost - 1 - i);
            d += power * c[i] * std::pow(p_max, power - 1.0);
        }
        bool nonlinear = false;
        for (std::size_t i = 0; i + 2 < ncost; ++i) nonlinear = nonlinear || c[i] != 0.0;
        if (nonlinear) {
            ++reduced;
            logger()->debug("generator {}: polynomial cost reduced to marginal cost {} at p_max", gen_index + 1, d);
        }
        return d;
    }
    if (model == 1) {
        if (ncost < 2) throw ParseError("piecewise-linear cost needs at least two points", row.line);
        const double x0 = c[2 * (ncost - 2)], y0 = c[2 * (ncost - 2) + 1];
        const double x1 = c[2 * (ncost - 1)], y1 = c[2 * (ncost - 1) + 1];
        if (x1 == x0) throw ParseError("piecewise-linear cost has repeated breakpoints", row.line);
        const double slope = (y1 - y0) / (x1 - x0);
        if (ncost > 2) {
            ++reduced;
            logger()->debug("generator {}: piecewise cost reduced to last-segment slope {}", gen_index + 1, slope);
        }
        return slope;
    }
    throw ParseError(fmt::format("unknown cost model {}", model), row.line);
}

double json_number(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ParseError(fmt::format("{}: missing field '{}'", where, key));
    const auto& v = j.at(key);
    if (!v.is_number()) throw ParseError(fmt::format("{}: field '{}' must be a number", where, key));
    return v.get<double>();
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n')) + 1;
}

}  // namespace

Network parse_matpower(std::string_view text) {
    const auto t = scan_matpower(text);
    const auto& bus_rows = require_table(t, "bus");
    const auto& gen_rows = require_table(t, "gen");
    const auto& branch_rows = require_table(t, "branch");
    const auto& cost_rows = require_table(t, "gencost");

    Network net;
    net.base_mva = t.base_mva.value_or(100.0);

    std::map<long long, int> index_of;
    for (const auto& row : bus_rows) {
        require_columns(row, 3, "bus");
        const auto number = static_cast<long long>(row.values[0]);
        if (index_of.contains(number)) throw ParseError(fmt::format("duplicate bus number {}", number), row.line);
        const int id = static_cast<int>(net.buses.size());
        index_of[number] = id;
        net.buses.push_back(Bus{id, row.values[2], integer_label(row.values[0])});
    }
    auto bus_index = [&](double number, std::size_t line) {
        auto it = index_of.find(static_cast<long long>(number));
        if (it == index_of.end()) throw ParseError(fmt::format("reference to unknown bus {}", number), line);
        return it->second;
    };

    if (cost_rows.size() < gen_rows.size())
        throw ParseError(fmt::format("mpc.gencost has {} rows for {} generators", cost_rows.size(), gen_rows.size()));
    const std::vector<std::string>* fuel = nullptr;
    if (auto it = t.cells.find("genfuel"); it != t.cells.end()) {
        fuel = &it->second;
        if (fuel->size() != gen_rows.size())
            throw ParseError(fmt::format("mpc.genfuel has {} entries for {} generators", fuel->size(), gen_rows.size()));
    }

    int reduced = 0;
    for (std::size_t g = 0; g < gen_rows.size(); ++g) {
        const auto& row = gen_rows[g];
        require_columns(row, 10, "gen");
        if (row.values[7] <= 0.0) continue;
        Generator gen;
        gen.bus = bus_index(row.values[0], row.line);
        gen.p_max = row.values[8];
        gen.p_min = row.values[9];
        gen.marginal_cost = marginal_cost(cost_rows[g], gen.p_max, g, reduced);
        gen.is_wind = fuel && (*fuel)[g] == "wind";
        gen.rated_capacity = gen.is_wind ? gen.p_max : 0.0;
        gen.label = fmt::format("G{}", g + 1);
        net.generators.push_back(std::move(gen));
    }
    if (reduced > 0)
        logger()->warn("{} generator cost curves reduced to a constant marginal cost (slope at p_max)", reduced);

    for (const auto& row : branch_rows) {
        require_columns(row, 4, "branch");
        const double status = row.values.size() > 10 ? row.values[10] : 1.0;
        if (status <= 0.0) continue;
        Branch br;
        br.id = static_cast<int>(net.branches.size());
        br.from_bus = bus_index(row.values[0], row.line);
        br.to_bus = bus_index(row.values[1], row.line);
        br.reactance = row.values[3];
        const double rate = row.values.size() > 5 ? row.values[5] : 0.0;
        br.flow_limit = rate > 0.0 ? rate : kUnlimited;
        net.branches.push_back(br);
    }

    require_valid(net);
    return net;
}

Network parse_network_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), line_of_offset(text, e.byte));
    }
    if (!doc.is_object()) throw ParseError("case JSON must be an object");
    for (const char* key : {"buses", "branches", "generators"})
        if (!doc.contains(key) || !doc[key].is_array()) throw ParseError(fmt::format("missing array '{}'", key));

    Network net;
    net.base_mva = doc.contains("base_mva") ? json_number(doc, "base_mva", "case") : 100.0;

    std::map<long long, int> index_of;
    for (std::size_t i = 0; i < doc["buses"].size(); ++i) {
        const auto& b = doc["buses"][i];
        const auto where = fmt::format("buses[{}]", i);
        const auto id = static_cast<long long>(json_number(b, "id", where));
        if (index_of.contains(id)) throw ParseError(fmt::format("{}: duplicate bus id {}", where, id));
        const int index = static_cast<int>(net.buses.size());
        index_of[id] = index;
        Bus bus{index, json_number(b, "demand", where), ""};
        bus.label = b.contains("label") && b["label"].is_string() ? b["label"].get<std::string>()
                                                                    : fmt::format("{}", id);
        net.buses.push_back(std::move(bus));
    }
    auto bus_index = [&](const json& j, const char* key, const std::string& where) {
        const auto id = static_cast<long long>(json_number(j, key, where));
        auto it = index_of.find(id);
        if (it == index_of.end()) throw ParseError(fmt::format("{}: unknown bus {}", where, id));
        return it->second;
    };

    for (std::size_t i = 0; i < doc["branches"].size(); ++i) {
        const auto& b = doc["branches"][i];
        const auto where = fmt::format("branches[{}]", i);
        Branch br;
        br.id = static_cast<int>(i);
        br.from_bus = bus_index(b, "from_bus", where);
        br.to_bus = bus_index(b, "to_bus", where);
        br.reactance = json_number(b, "reactance", where);
        br.flow_limit = (!b.contains("flow_limit") || b["flow_limit"].is_null()) ? kUnlimited
                                                                                 : json_number(b, "flow_limit", where);
        net.branches.push_back(br);
    }

    for (std::size_t i = 0; i < doc["generators"].size(); ++i) {
        const auto& g = doc["generators"][i];
        const auto where = fmt::format("generators[{}]", i);
        Generator gen;
        gen.bus = bus_index(g, "bus", where);
        gen.marginal_cost = json_number(g, "marginal_cost", where);
        gen.p_min = g.contains("p_min") ? json_number(g, "p_min", where) : 0.0;
        gen.p_max = json_number(g, "p_max", where);
        gen.is_wind = g.value("is_wind", false);
        gen.rated_capacity = g.contains("rated_capacity") ? json_number(g, "rated_capacity", where)
                                                          : (gen.is_wind ? gen.p_max : 0.0);
        gen.label = g.contains("label") && g["label"].is_string() ? g["label"].get<std::string>()
                                                                  : fmt::format("G{}", i + 1);
        net.generators.push_back(std::move(gen));
    }

    require_valid(net);
    return net;
}

Network parse_case_file(std::string_view text) {
    auto body = trim(text);
    if (!body.empty() && body.front() == '{') return parse_network_json(text);
    return parse_matpower(text);
}

Network load_case_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open case file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_case_file(buf.str());
}

std::string network_to_json(const Network& network) {
    json doc;
    doc["base_mva"] = network.base_mva;
    doc["buses"] = json::array();
    for (const auto& b : network.buses) doc["buses"].push_back({{"id", b.id}, {"demand", b.demand}, {"label", b.label}});
    doc["branches"] = json::array();
    for (const auto& br : network.branches) {
        json j = {{"id", br.id}, {"from_bus", br.from_bus}, {"to_bus", br.to_bus}, {"reactance", br.reactance}};
        j["flow_limit"] = std::isfinite(br.flow_limit) ? json(br.flow_limit) : json(nullptr);
        doc["branches"].push_back(std::move(j));
    }
    doc["generators"] = json::array();
    for (const auto& g : network.generators)
        doc["generators"].push_back({{"bus", g.bus},
                                     {"marginal_cost", g.marginal_cost},
                                     {"p_min", g.p_min},
                                     {"p_max", g.p_max},
                                     {"is_wind", g.is_wind},
                                     {"rated_capacity", g.rated_capacity},
                                     {"label", g.label}});
    return doc.dump(2) + "\n";
}

}  // namespace gridzones
