#include "rccopf/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace rccopf {

namespace {

[[noreturn]] void fail(const std::string& what) { throw InvalidInput(what); }

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Minutes since an arbitrary epoch for an ISO-8601 local timestamp
// (YYYY-MM-DD[T ]HH:MM[:SS]). Uses the days-from-civil algorithm; no time
// zones.
long parse_iso_minutes(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  const int got = std::sscanf(text.c_str(), "%4d-%2d-%2d%*1[T ]%2d:%2d:%2d", &y,
                              &mo, &d, &h, &mi, &s);
  if (got < 5) fail("cannot parse timestamp '" + text + "'");
  y -= mo <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      (153u * static_cast<unsigned>(mo + (mo > 2 ? -3 : 9)) + 2u) / 5u +
      static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  const long days = era * 146097L + static_cast<long>(doe) - 719468L;
  return days * 24L * 60L + h * 60L + mi;
}

}  // namespace

double parse_probability_string(const std::string& text) {
  try {
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
      const double num = std::stod(text.substr(0, slash));
      const double den = std::stod(text.substr(slash + 1));
      if (den == 0) fail("zero denominator in probability '" + text + "'");
      return num / den;
    }
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) fail("cannot parse probability '" + text + "'");
    return v;
  } catch (const std::logic_error&) {
    fail("cannot parse probability '" + text + "'");
  }
}

double parse_probability(const Json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) return parse_probability_string(value.get<std::string>());
  fail("probability must be a number or a fraction string");
}

LoadedCase parse_case(const Json& doc) {
  LoadedCase out;
  GridCase& g = out.grid;
  try {
    g.base_mva = doc.value("base_mva", 100.0);

    for (const Json& jb : doc.at("buses")) {
      Bus b;
      b.id = jb.at("id").get<int>();
      b.demand_mw = jb.value("demand_mw", 0.0);
      b.is_reference = jb.value("reference", false);
      g.buses.push_back(b);
    }
    // Remap arbitrary ids to the contiguous internal indexing.
    std::map<int, int> id_map;
    std::vector<Bus> sorted = g.buses;
    std::sort(sorted.begin(), sorted.end(),
              [](const Bus& a, const Bus& b) { return a.id < b.id; });
    for (size_t i = 0; i < sorted.size(); ++i) {
      if (!id_map.emplace(sorted[i].id, static_cast<int>(i)).second) {
        fail("duplicate bus id " + std::to_string(sorted[i].id));
      }
      sorted[i].id = static_cast<int>(i);
    }
    g.buses = std::move(sorted);
    auto bus_of = [&](const Json& j, const char* owner) {
      const int raw = j.get<int>();
      const auto it = id_map.find(raw);
      if (it == id_map.end()) {
        fail(std::string(owner) + " references missing bus " + std::to_string(raw));
      }
      return it->second;
    };

    if (doc.contains("lines")) {
      for (const Json& jl : doc.at("lines")) {
        Line l;
        l.from = bus_of(jl.at("from"), "line");
        l.to = bus_of(jl.at("to"), "line");
        l.susceptance = jl.at("susceptance").get<double>();
        l.capacity_mw = jl.at("capacity_mw").get<double>();
        l.eps = jl.contains("eps") ? parse_probability(jl.at("eps")) : kDefaultLineEps;
        g.lines.push_back(l);
      }
    }

    if (doc.contains("generators")) {
      for (const Json& jg : doc.at("generators")) {
        Generator gen;
        gen.id = jg.at("id").get<int>();
        gen.bus = bus_of(jg.at("bus"), "generator");
        gen.p_min_mw = jg.value("p_min_mw", 0.0);
        gen.p_max_mw = jg.at("p_max_mw").get<double>();
        gen.ramp_up_mw = jg.value("ramp_up_mw", gen.p_max_mw);
        gen.ramp_down_mw = jg.value("ramp_down_mw", gen.p_max_mw);
        gen.cost_lin = jg.value("cost_linear", 0.0);
        gen.cost_quad = jg.value("cost_quadratic", 0.0);
        gen.eps = jg.contains("eps") ? parse_probability(jg.at("eps")) : kDefaultGenEps;
        gen.dispatchable = jg.value("dispatchable", true);
        gen.fixed_output_mw = jg.value("fixed_output_mw", 0.0);
        gen.in_service = jg.value("in_service", true);
        if (jg.contains("alpha")) {
          const Json& ja = jg.at("alpha");
          if (ja.is_number()) {
            gen.alpha_policy = AlphaPolicy::Fixed;
            gen.alpha_value = ja.get<double>();
          } else if (ja == "shared") {
            gen.alpha_policy = AlphaPolicy::Shared;
          } else if (ja == "variable") {
            gen.alpha_policy = AlphaPolicy::Variable;
          } else {
            fail("generator " + std::to_string(gen.id) +
                 ": alpha must be \"variable\", \"shared\" or a number");
          }
        }
        g.generators.push_back(gen);
      }
    }

    std::map<int, Index> wind_index;
    if (doc.contains("wind_farms")) {
      for (const Json& jw : doc.at("wind_farms")) {
        WindFarm w;
        w.bus = bus_of(jw.at("bus"), "wind farm");
        w.forecast_mw = jw.value("forecast_mw", 0.0);
        g.wind_farms.push_back(w);
      }
    }

    out.warnings = g.normalize();
    for (size_t i = 0; i < g.wind_farms.size(); ++i) {
      wind_index[g.wind_farms[i].bus] = static_cast<Index>(i);
    }

    const Index nw = static_cast<Index>(g.wind_farms.size());
    WindUncertainty& u = out.uncertainty_mw;
    u.sigma2 = Vector::Zero(nw);
    u.mu_half = Vector::Zero(nw);
    u.sigma2_half = Vector::Zero(nw);
    if (doc.contains("uncertainty")) {
      const Json& ju = doc.at("uncertainty");
      u.gamma_mu = ju.contains("gamma_mu") ? parse_probability(ju.at("gamma_mu")) : 0.0;
      u.gamma_sigma =
          ju.contains("gamma_sigma") ? parse_probability(ju.at("gamma_sigma")) : 0.0;
      if (ju.contains("wind")) {
        for (const Json& jw : ju.at("wind")) {
          const int bus = bus_of(jw.at("bus"), "uncertainty entry");
          const auto it = wind_index.find(bus);
          if (it == wind_index.end()) {
            fail("uncertainty entry references bus " + std::to_string(jw.at("bus").get<int>()) +
                 " which carries no wind farm");
          }
          u.sigma2[it->second] += jw.value("sigma2", 0.0);
          u.mu_half[it->second] += jw.value("mu_half", 0.0);
          u.sigma2_half[it->second] += jw.value("sigma2_half", 0.0);
        }
      }
    }

    if (doc.contains("monitored_lines")) {
      for (const Json& jm : doc.at("monitored_lines")) {
        const int from = bus_of(jm.at(0), "monitored line");
        const int to = bus_of(jm.at(1), "monitored line");
        const auto key = std::minmax(from, to);
        int found = -1;
        for (size_t li = 0; li < g.lines.size(); ++li) {
          if (std::minmax(g.lines[li].from, g.lines[li].to) == key) {
            found = static_cast<int>(li);
            break;
          }
        }
        if (found < 0) {
          fail("monitored line (" + std::to_string(jm.at(0).get<int>()) + "," +
               std::to_string(jm.at(1).get<int>()) + ") does not exist");
        }
        g.monitored_lines.push_back(found);
      }
    }

    g.validate();
    u.validate();
  } catch (const Json::exception& e) {
    fail(std::string("case schema error: ") + e.what());
  }
  return out;
}

LoadedCase load_case(const std::string& path) {
  return parse_case(read_json(path));
}

Json case_to_json(const GridCase& g, const WindUncertainty& u) {
  Json doc;
  doc["base_mva"] = g.base_mva;
  doc["buses"] = Json::array();
  for (const Bus& b : g.buses) {
    Json jb{{"id", b.id}, {"demand_mw", b.demand_mw}};
    if (b.is_reference) jb["reference"] = true;
    doc["buses"].push_back(jb);
  }
  doc["lines"] = Json::array();
  for (const Line& l : g.lines) {
    doc["lines"].push_back(Json{{"from", l.from},
                                {"to", l.to},
                                {"susceptance", l.susceptance},
                                {"capacity_mw", l.capacity_mw},
                                {"eps", l.eps}});
  }
  doc["generators"] = Json::array();
  for (const Generator& gen : g.generators) {
    Json jg{{"id", gen.id},
            {"bus", gen.bus},
            {"p_min_mw", gen.p_min_mw},
            {"p_max_mw", gen.p_max_mw},
            {"ramp_up_mw", gen.ramp_up_mw},
            {"ramp_down_mw", gen.ramp_down_mw},
            {"cost_linear", gen.cost_lin},
            {"cost_quadratic", gen.cost_quad},
            {"eps", gen.eps},
            {"dispatchable", gen.dispatchable},
            {"in_service", gen.in_service}};
    if (!gen.dispatchable) jg["fixed_output_mw"] = gen.fixed_output_mw;
    switch (gen.alpha_policy) {
      case AlphaPolicy::Variable: jg["alpha"] = "variable"; break;
      case AlphaPolicy::Shared: jg["alpha"] = "shared"; break;
      case AlphaPolicy::Fixed: jg["alpha"] = gen.alpha_value; break;
    }
    doc["generators"].push_back(jg);
  }
  doc["wind_farms"] = Json::array();
  Json uncertainty_wind = Json::array();
  for (size_t w = 0; w < g.wind_farms.size(); ++w) {
    doc["wind_farms"].push_back(
        Json{{"bus", g.wind_farms[w].bus}, {"forecast_mw", g.wind_farms[w].forecast_mw}});
    uncertainty_wind.push_back(Json{{"bus", g.wind_farms[w].bus},
                                    {"sigma2", u.sigma2[static_cast<Index>(w)]},
                                    {"mu_half", u.mu_half[static_cast<Index>(w)]},
                                    {"sigma2_half", u.sigma2_half[static_cast<Index>(w)]}});
  }
  doc["uncertainty"] = Json{{"gamma_mu", u.gamma_mu},
                            {"gamma_sigma", u.gamma_sigma},
                            {"wind", uncertainty_wind}};
  if (!g.monitored_lines.empty()) {
    Json monitored = Json::array();
    for (int li : g.monitored_lines) {
      monitored.push_back(Json::array(
          {g.lines[static_cast<size_t>(li)].from, g.lines[static_cast<size_t>(li)].to}));
    }
    doc["monitored_lines"] = monitored;
  }
  return doc;
}

void save_case(const GridCase& g, const WindUncertainty& u, const std::string& path) {
  write_json(case_to_json(g, u), path);
}

namespace {

struct CsvRow {
  long minutes;
  std::string stamp;
  std::string kind;
  int bus;
  double value;
};

std::vector<CsvRow> read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open time series file '" + path + "'");
  std::vector<CsvRow> rows;
  std::string line;
  bool first = true;
  long prev = std::numeric_limits<long>::min();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string stamp, kind, bus_s, value_s;
    if (!std::getline(ss, stamp, ',') || !std::getline(ss, kind, ',') ||
        !std::getline(ss, bus_s, ',') || !std::getline(ss, value_s)) {
      fail("malformed row in '" + path + "': " + line);
    }
    if (first && stamp == "timestamp") {
      first = false;
      continue;
    }
    first = false;
    CsvRow row;
    row.minutes = parse_iso_minutes(stamp);
    row.stamp = stamp;
    row.kind = kind;
    row.bus = std::stoi(bus_s);
    row.value = std::stod(value_s);
    if (row.kind != "load" && row.kind != "wind") {
      fail("unknown series kind '" + row.kind + "' in '" + path + "'");
    }
    if (row.minutes < prev) {
      fail("timestamps not monotone in '" + path + "' at " + stamp);
    }
    prev = row.minutes;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail("time series file '" + path + "' is empty");
  return rows;
}

}  // namespace

TimeSeries load_time_series(const GridCase& grid, const std::string& forecasts_csv,
                            const std::string& realizations_csv) {
  const Index nb = grid.bus_count();
  const Index nw = static_cast<Index>(grid.wind_farms.size());
  std::map<int, Index> wind_index;
  for (size_t w = 0; w < grid.wind_farms.size(); ++w) {
    wind_index[grid.wind_farms[w].bus] = static_cast<Index>(w);
  }

  TimeSeries out;
  const auto frows = read_series_csv(forecasts_csv);

  // Hour indexing from the distinct forecast stamps.
  std::map<long, int> hour_of;
  for (const CsvRow& r : frows) {
    if (!hour_of.count(r.minutes)) {
      const int h = static_cast<int>(hour_of.size());
      hour_of[r.minutes] = h;
      out.hour_stamps.push_back(r.stamp);
    }
  }
  const int hours = static_cast<int>(hour_of.size());
  {
    long prev = std::numeric_limits<long>::min();
    bool first = true;
    for (const auto& [minutes, h] : hour_of) {
      if (!first && minutes - prev != 60) {
        fail("forecast timestamps must advance in whole hours");
      }
      prev = minutes;
      first = false;
    }
  }

  for (int h = 0; h < hours; ++h) {
    HourScenario sc;
    sc.hour = h;
    sc.demand_mw = Vector::Zero(nb);
    for (const Bus& b : grid.buses) sc.demand_mw[b.id] = b.demand_mw;
    sc.wind_forecast_mw = Vector::Constant(nw, kInf);  // must be provided
    out.scenarios.push_back(std::move(sc));
  }
  for (const CsvRow& r : frows) {
    HourScenario& sc = out.scenarios[static_cast<size_t>(hour_of.at(r.minutes))];
    if (r.kind == "load") {
      if (r.bus < 0 || r.bus >= nb) fail("forecast row references missing bus " + std::to_string(r.bus));
      sc.demand_mw[r.bus] = r.value;
    } else {
      const auto it = wind_index.find(r.bus);
      if (it == wind_index.end()) {
        fail("wind forecast references bus " + std::to_string(r.bus) +
             " which carries no wind farm");
      }
      sc.wind_forecast_mw[it->second] = r.value;
    }
  }
  for (int h = 0; h < hours; ++h) {
    const auto& sc = out.scenarios[static_cast<size_t>(h)];
    for (Index w = 0; w < nw; ++w) {
      if (!std::isfinite(sc.wind_forecast_mw[w])) {
        fail("hour " + out.hour_stamps[static_cast<size_t>(h)] +
             " is missing the wind forecast for bus " +
             std::to_string(grid.wind_farms[static_cast<size_t>(w)].bus));
      }
    }
  }

  // Realizations: every stamp maps to (hour, 5-minute slot).
  const auto rrows = read_series_csv(realizations_csv);
  const long first_hour_minutes = hour_of.begin()->first;
  for (int h = 0; h < hours; ++h) {
    auto& intervals = out.realizations[h];
    const auto& sc = out.scenarios[static_cast<size_t>(h)];
    for (int tau = 0; tau < kIntervalsPerHour; ++tau) {
      IntervalRealization r;
      r.hour = h;
      r.interval = tau;
      r.demand_mw = sc.demand_mw;                  // default: hourly forecast
      r.wind_mw = Vector::Constant(nw, kInf);      // must be provided
      intervals.push_back(std::move(r));
    }
  }
  for (const CsvRow& r : rrows) {
    const long offset = r.minutes - first_hour_minutes;
    if (offset < 0 || offset % 5 != 0) {
      fail("realization stamp " + r.stamp + " is not on the 5-minute grid");
    }
    const int h = static_cast<int>(offset / 60);
    const int tau = static_cast<int>((offset % 60) / 5);
    if (h >= hours) fail("realization stamp " + r.stamp + " lies past the forecast window");
    IntervalRealization& iv = out.realizations.at(h)[static_cast<size_t>(tau)];
    if (r.kind == "load") {
      if (r.bus < 0 || r.bus >= nb) fail("realization row references missing bus " + std::to_string(r.bus));
      iv.demand_mw[r.bus] = r.value;
    } else {
      const auto it = wind_index.find(r.bus);
      if (it == wind_index.end()) {
        fail("wind realization references bus " + std::to_string(r.bus) +
             " which carries no wind farm");
      }
      iv.wind_mw[it->second] = r.value;
    }
  }
  for (int h = 0; h < hours; ++h) {
    for (int tau = 0; tau < kIntervalsPerHour; ++tau) {
      const auto& iv = out.realizations.at(h)[static_cast<size_t>(tau)];
      for (Index w = 0; w < nw; ++w) {
        if (!std::isfinite(iv.wind_mw[w])) {
          fail("hour " + out.hour_stamps[static_cast<size_t>(h)] + " interval " +
               std::to_string(tau) + ": wind realization missing for bus " +
               std::to_string(grid.wind_farms[static_cast<size_t>(w)].bus) +
               " (each forecast hour needs exactly 12 intervals)");
        }
      }
    }
  }
  return out;
}

std::vector<std::string> hourly_stamps(const std::string& start_iso, int hours) {
  const long start = parse_iso_minutes(start_iso);
  std::vector<std::string> stamps;
  for (int h = 0; h < hours; ++h) {
    const long total = start + 60L * h;
    // Reverse of parse_iso_minutes.
    long days = total / (24 * 60);
    long rem = total % (24 * 60);
    const long z = days + 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long y = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04ld-%02u-%02uT%02ld:%02ld:00",
                  y + (m <= 2), m, d, rem / 60, rem % 60);
    stamps.emplace_back(buf);
  }
  return stamps;
}

namespace {

std::string interval_stamp(const std::string& hour_stamp, int tau) {
  // hour stamps end with ":MM:SS"; intervals sit at minutes 0,5,...,55.
  std::string s = hour_stamp;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d", tau * 5);
  s[14] = buf[0];
  s[15] = buf[1];
  return s;
}

}  // namespace

void save_forecasts_csv(const GridCase& grid, const std::vector<HourScenario>& scenarios,
                        const std::vector<std::string>& hour_stamps,
                        const std::string& path) {
  std::ofstream outf(path);
  if (!outf) fail("cannot write '" + path + "'");
  outf << "timestamp,kind,bus,value\n";
  for (size_t h = 0; h < scenarios.size(); ++h) {
    const HourScenario& sc = scenarios[h];
    for (const Bus& b : grid.buses) {
      // A missing row defaults to the case demand on load, so only buses
      // that are zero both here and in the case can be skipped.
      if (sc.demand_mw.size() > 0 &&
          (sc.demand_mw[b.id] != 0.0 || b.demand_mw != 0.0)) {
        outf << hour_stamps[h] << ",load," << b.id << ','
             << fmt_double(sc.demand_mw[b.id]) << '\n';
      }
    }
    for (size_t w = 0; w < grid.wind_farms.size(); ++w) {
      outf << hour_stamps[h] << ",wind," << grid.wind_farms[w].bus << ','
           << fmt_double(sc.wind_forecast_mw[static_cast<Index>(w)]) << '\n';
    }
  }
}

void save_realizations_csv(
    const GridCase& grid, const std::vector<HourScenario>& scenarios,
    const std::map<int, std::vector<IntervalRealization>>& realizations,
    const std::vector<std::string>& hour_stamps, const std::string& path) {
  std::ofstream outf(path);
  if (!outf) fail("cannot write '" + path + "'");
  outf << "timestamp,kind,bus,value\n";
  for (const auto& [hour, intervals] : realizations) {
    const HourScenario& sc = scenarios.at(static_cast<size_t>(hour));
    for (const IntervalRealization& iv : intervals) {
      const std::string stamp =
          interval_stamp(hour_stamps[static_cast<size_t>(hour)], iv.interval);
      for (const Bus& b : grid.buses) {
        // A missing row defaults to the hourly forecast demand on load.
        if (iv.demand_mw[b.id] != sc.demand_mw[b.id]) {
          outf << stamp << ",load," << b.id << ',' << fmt_double(iv.demand_mw[b.id])
               << '\n';
        }
      }
      for (size_t w = 0; w < grid.wind_farms.size(); ++w) {
        outf << stamp << ",wind," << grid.wind_farms[w].bus << ','
             << fmt_double(iv.wind_mw[static_cast<Index>(w)]) << '\n';
      }
    }
  }
}

void write_intervals_csv(const std::vector<IntervalRecord>& records,
                         int hours_total, const std::vector<int>& infeasible_hours,
                         const std::string& path) {
  std::ofstream outf(path);
  if (!outf) fail("cannot write '" + path + "'");
  outf << "# hours_total=" << hours_total << " infeasible=";
  for (size_t k = 0; k < infeasible_hours.size(); ++k) {
    if (k) outf << ';';
    outf << infeasible_hours[k];
  }
  outf << '\n';
  outf << "hour,interval,ace_mw,omega_total_mw,cost,ramp_violation_gens,"
          "overloads\n";
  for (const IntervalRecord& rec : records) {
    std::string gens, lines;
    for (size_t k = 0; k < rec.ramp_violations.size(); ++k) {
      if (k) gens += ';';
      gens += std::to_string(rec.ramp_violations[k]);
    }
    // line_index:magnitude pairs keep reaggregation exact.
    for (size_t k = 0; k < rec.overloads.size(); ++k) {
      if (k) lines += ';';
      lines += std::to_string(rec.overloads[k]) + ':' +
               fmt_double(rec.overload_mw[rec.overloads[k]]);
    }
    outf << rec.hour << ',' << rec.interval << ',' << fmt_double(rec.ace_mw) << ','
         << fmt_double(rec.omega_total_mw) << ',' << fmt_double(rec.cost) << ','
         << gens << ',' << lines << '\n';
  }
}

IntervalsFile read_intervals_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  IntervalsFile out;
  std::vector<IntervalRecord>& records = out.records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      int hours = 0;
      char infe[4096] = {0};
      if (std::sscanf(line.c_str(), "# hours_total=%d infeasible=%4095s", &hours,
                      infe) >= 1) {
        out.hours_total = hours;
        std::stringstream hs(infe);
        std::string tok;
        while (std::getline(hs, tok, ';')) {
          if (!tok.empty()) out.infeasible_hours.push_back(std::stoi(tok));
        }
      }
      continue;
    }
    if (line.rfind("hour,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string field;
    IntervalRecord rec;
    std::getline(ss, field, ',');
    rec.hour = std::stoi(field);
    std::getline(ss, field, ',');
    rec.interval = std::stoi(field);
    std::getline(ss, field, ',');
    rec.ace_mw = std::stod(field);
    std::getline(ss, field, ',');
    rec.omega_total_mw = std::stod(field);
    std::getline(ss, field, ',');
    rec.cost = std::stod(field);
    std::getline(ss, field, ',');
    std::stringstream gens(field);
    std::string tok;
    while (std::getline(gens, tok, ';')) {
      if (!tok.empty()) rec.ramp_violations.push_back(std::stoi(tok));
    }
    std::getline(ss, field);
    std::stringstream lines_ss(field);
    std::vector<std::pair<int, double>> overs;
    int max_line = -1;
    while (std::getline(lines_ss, tok, ';')) {
      if (tok.empty()) continue;
      const auto colon = tok.find(':');
      if (colon == std::string::npos) fail("malformed overload entry '" + tok + "'");
      overs.emplace_back(std::stoi(tok.substr(0, colon)),
                         std::stod(tok.substr(colon + 1)));
      max_line = std::max(max_line, overs.back().first);
    }
    rec.overload_mw = Vector::Zero(max_line + 1);
    for (const auto& [li, mw] : overs) {
      rec.overloads.push_back(li);
      rec.overload_mw[li] = mw;
    }
    records.push_back(std::move(rec));
  }
  if (out.hours_total == 0) {
    std::set<int> seen;
    for (const auto& rec : records) seen.insert(rec.hour);
    out.hours_total = static_cast<int>(seen.size());
  }
  return out;
}

Json report_to_json(const SimulationReport& report) {
  Json doc;
  doc["hours_total"] = report.hours_total;
  doc["hours_solved"] = report.hours_solved;
  doc["infeasible_hours"] = report.infeasible_hours;
  doc["intervals"] = report.intervals;
  doc["total_cost"] = report.total_cost;
  doc["ace_mean_mw"] = report.ace_mean;
  doc["ace_max_mw"] = report.ace_max;
  doc["ace_cdf_mw"] = report.ace_sorted;
  Json ramp = Json::object();
  for (const auto& [gen, count] : report.ramp_violations_by_gen) {
    ramp[std::to_string(gen)] = count;
  }
  doc["ramp_violations_by_gen"] = ramp;
  Json over = Json::object();
  Json over_max = Json::object();
  for (const auto& [line, count] : report.overloads_by_line) {
    over[std::to_string(line)] = count;
  }
  for (const auto& [line, mw] : report.max_overload_by_line) {
    over_max[std::to_string(line)] = mw;
  }
  doc["overloads_by_line"] = over;
  doc["max_overload_by_line_mw"] = over_max;
  return doc;
}

Json diagnostics_to_json(const SolveDiagnostics& diag) {
  Json doc;
  doc["iterations"] = diag.iterations;
  doc["master_solves"] = diag.master_solves;
  doc["termination"] = diag.termination;
  doc["final_max_violation"] = diag.final_max_violation;
  doc["objective_sequence"] = diag.objective_sequence;
  Json cuts = Json::object();
  for (const auto& [family, count] : diag.cuts_added) cuts[family] = count;
  doc["cuts_added"] = cuts;
  doc["cut_labels"] = diag.cut_labels;
  return doc;
}

Json solution_to_json(const GridCase& grid, const DispatchSolution& solution) {
  Json doc;
  doc["objective"] = solution.objective;
  Json gens = Json::array();
  for (size_t i = 0; i < grid.generators.size(); ++i) {
    gens.push_back(Json{{"id", grid.generators[i].id},
                        {"p_mw", solution.p_mw[static_cast<Index>(i)]},
                        {"alpha", solution.alpha[static_cast<Index>(i)]}});
  }
  doc["generators"] = gens;
  doc["theta"] = std::vector<double>(solution.theta.data(),
                                     solution.theta.data() + solution.theta.size());
  doc["delta"] = std::vector<double>(solution.delta.data(),
                                     solution.delta.data() + solution.delta.size());
  Json flows = Json::array();
  for (size_t li = 0; li < grid.lines.size(); ++li) {
    flows.push_back(Json{{"from", grid.lines[li].from},
                         {"to", grid.lines[li].to},
                         {"flow_mw", solution.flows_mw[static_cast<Index>(li)]}});
  }
  doc["flows"] = flows;
  doc["diagnostics"] = diagnostics_to_json(solution.diagnostics);
  doc["diagnostics"].erase("objective_sequence");
  return doc;
}

void write_json(const Json& doc, const std::string& path) {
  std::ofstream outf(path);
  if (!outf) fail("cannot write '" + path + "'");
  outf << doc.dump(2) << '\n';
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail("cannot parse '" + path + "': " + e.what());
  }
}

}  // namespace rccopf
