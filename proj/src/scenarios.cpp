#include "gridzones/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "gridzones/errors.hpp"
#include "gridzones/format.hpp"

namespace gridzones {
namespace {

// Uniform variate in (0, 1) from the substream for one (scenario, farm) pair.
double substream_uniform(std::uint64_t seed, std::uint32_t scenario, std::uint32_t farm) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), scenario, farm};
    std::mt19937_64 engine(seq);
    return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

constexpr std::uint32_t kSharedStream = 0xFFFFFFFFu;

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        auto cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.front()))) cell.remove_prefix(1);
        while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) cell.remove_suffix(1);
        cells.emplace_back(cell);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

}  // namespace

void validate(const WindModel& m) {
    if (!(m.weibull_shape > 0.0) || !(m.weibull_scale > 0.0))
        throw ConfigError(fmt::format("Weibull shape and scale must be positive (got {}, {})", m.weibull_shape,
                                      m.weibull_scale));
    if (!(m.cut_in >= 0.0) || !(m.cut_in < m.rated) || !(m.rated <= m.cut_out))
        throw ConfigError(fmt::format("wind speeds must satisfy 0 <= cut_in < rated <= cut_out (got {}, {}, {})",
                                      m.cut_in, m.rated, m.cut_out));
}

double capacity_factor(double v, const WindModel& m) {
    if (v < m.cut_in || v > m.cut_out) return 0.0;
    if (v >= m.rated) return 1.0;
    const double ci3 = m.cut_in * m.cut_in * m.cut_in;
    const double r3 = m.rated * m.rated * m.rated;
    return std::clamp((v * v * v - ci3) / (r3 - ci3), 0.0, 1.0);
}

double weibull_speed(double u, const WindModel& m) {
    return m.weibull_scale * std::pow(-std::log1p(-u), 1.0 / m.weibull_shape);
}

ScenarioSet monte_carlo_scenarios(const Network& network, int count, std::uint64_t seed, const WindModel& params) {
    if (count < 1) throw ConfigError(fmt::format("scenario count must be at least 1, got {}", count));
    validate(params);
    const auto wind = network.wind_generators();

    ScenarioSet set;
    set.provenance = MonteCarloSource{seed, params};
    set.scenarios.resize(static_cast<std::size_t>(count));
    for (int s = 0; s < count; ++s) {
        auto& sc = set.scenarios[static_cast<std::size_t>(s)];
        sc.id = s;
        sc.capacity_factors.resize(wind.size());
        const double shared = params.correlation == WindCorrelation::shared
                                  ? weibull_speed(substream_uniform(seed, static_cast<std::uint32_t>(s), kSharedStream), params)
                                  : 0.0;
        for (std::size_t w = 0; w < wind.size(); ++w) {
            const double v = params.correlation == WindCorrelation::shared
                                 ? shared
                                 : weibull_speed(substream_uniform(seed, static_cast<std::uint32_t>(s),
                                                                   static_cast<std::uint32_t>(w)),
                                                 params);
            sc.capacity_factors[w] = capacity_factor(v, params);
        }
    }
    return set;
}

ScenarioSet parse_scenarios_csv(std::string_view text, const Network& network, std::string source) {
    const auto wind = network.wind_generators();
    std::map<std::string, std::size_t> slot_of;
    for (std::size_t w = 0; w < wind.size(); ++w) slot_of[network.generators[static_cast<std::size_t>(wind[w])].label] = w;

    std::vector<std::pair<std::size_t, std::string>> lines;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string line(text.substr(pos, nl - pos));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++line_no;
        if (line.find_first_not_of(" \t") != std::string::npos) lines.emplace_back(line_no, std::move(line));
        pos = nl + 1;
    }
    if (lines.empty()) throw ParseError("scenario CSV is empty: no header");

    const auto header = split_csv_line(lines.front().second);
    std::vector<std::size_t> column_slot;
    std::vector<char> covered(wind.size(), 0);
    for (const auto& name : header) {
        auto it = slot_of.find(name);
        if (it == slot_of.end())
            throw ParseError(fmt::format("unknown wind generator label '{}'", name), lines.front().first);
        if (covered[it->second]) throw ParseError(fmt::format("duplicate column '{}'", name), lines.front().first);
        covered[it->second] = 1;
        column_slot.push_back(it->second);
    }
    for (std::size_t w = 0; w < wind.size(); ++w)
        if (!covered[w])
            throw ParseError(fmt::format("missing column for wind generator '{}'",
                                         network.generators[static_cast<std::size_t>(wind[w])].label),
                             lines.front().first);
    if (lines.size() == 1) throw ParseError("no scenarios");

    ScenarioSet set;
    set.provenance = CsvSource{std::move(source)};
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto& [ln, text_line] = lines[r];
        auto cells = split_csv_line(text_line);
        if (cells.size() != header.size())
            throw ParseError(fmt::format("row {} has {} cells, expected {}", r, cells.size(), header.size()), ln);
        WindScenario sc;
        sc.id = static_cast<int>(r - 1);
        sc.capacity_factors.assign(wind.size(), 0.0);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            const auto& cell = cells[c];
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
                throw ParseError(fmt::format("row {}, column {}: non-numeric value '{}'", r, header[c], cell), ln);
            if (!(v >= 0.0 && v <= 1.0))
                throw ParseError(fmt::format("row {}, column {}: capacity factor {} outside [0, 1]", r, header[c], v),
                                 ln);
            sc.capacity_factors[column_slot[c]] = v;
        }
        set.scenarios.push_back(std::move(sc));
    }
    return set;
}

ScenarioSet load_scenarios_csv(const std::filesystem::path& path, const Network& network) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenarios_csv(buf.str(), network, path.string());
}

std::string scenarios_to_csv(const ScenarioSet& scenarios, const Network& network) {
    const auto wind = network.wind_generators();
    std::string out;
    for (std::size_t w = 0; w < wind.size(); ++w) {
        if (w) out += ',';
        out += network.generators[static_cast<std::size_t>(wind[w])].label;
    }
    out += '\n';
    for (const auto& sc : scenarios.scenarios) {
        if (sc.capacity_factors.size() != wind.size())
            throw std::invalid_argument("scenarios_to_csv: factor count does not match wind generators");
        for (std::size_t w = 0; w < wind.size(); ++w) {
            if (w) out += ',';
            out += format_number(sc.capacity_factors[w]);
        }
        out += '\n';
    }
    return out;
}

Network apply_scenario(const Network& network, const WindScenario& scenario) {
    const auto wind = network.wind_generators();
    if (scenario.capacity_factors.size() != wind.size())
        throw std::invalid_argument(fmt::format("scenario {} has {} factors for {} wind generators", scenario.id,
                                                scenario.capacity_factors.size(), wind.size()));
    Network out = network;
    for (std::size_t w = 0; w < wind.size(); ++w) {
        auto& gen = out.generators[static_cast<std::size_t>(wind[w])];
        gen.p_max = gen.rated_capacity * scenario.capacity_factors[w];
        gen.p_min = 0.0;
    }
    double capacity = 0.0;
    for (const auto& g : out.generators) capacity += g.p_max;
    const double demand = out.total_demand();
    if (capacity < demand)
        throw InfeasibleError(fmt::format("scenario {}: available capacity {:.6g} MW below demand {:.6g} MW",
                                          scenario.id, capacity, demand));
    return out;
}

}  // namespace gridzones
