#include "rccopf/grid.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace rccopf {

int GridCase::reference_bus() const {
  for (const Bus& b : buses) {
    if (b.is_reference) return b.id;
  }
  throw InvalidInput("case has no reference bus");
}

double GridCase::total_demand_mw() const {
  double total = 0;
  for (const Bus& b : buses) total += b.demand_mw;
  return total;
}

double GridCase::total_wind_forecast_mw() const {
  double total = 0;
  for (const WindFarm& w : wind_farms) total += w.forecast_mw;
  return total;
}

std::vector<int> GridCase::effective_monitored_lines() const {
  if (!monitored_lines.empty()) return monitored_lines;
  std::vector<int> all(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) all[i] = static_cast<int>(i);
  return all;
}

std::vector<int> GridCase::monitored_buses() const {
  std::set<int> seen;
  for (int li : effective_monitored_lines()) {
    seen.insert(lines[static_cast<size_t>(li)].from);
    seen.insert(lines[static_cast<size_t>(li)].to);
  }
  return {seen.begin(), seen.end()};
}

std::vector<std::vector<int>> connected_components(Index bus_count,
                                                   const std::vector<Line>& lines) {
  std::vector<std::vector<int>> adj(static_cast<size_t>(bus_count));
  for (const Line& l : lines) {
    adj[static_cast<size_t>(l.from)].push_back(l.to);
    adj[static_cast<size_t>(l.to)].push_back(l.from);
  }
  std::vector<std::vector<int>> components;
  std::vector<bool> visited(static_cast<size_t>(bus_count), false);
  for (int start = 0; start < bus_count; ++start) {
    if (visited[static_cast<size_t>(start)]) continue;
    std::vector<int> comp;
    std::vector<int> stack{start};
    visited[static_cast<size_t>(start)] = true;
    while (!stack.empty()) {
      const int b = stack.back();
      stack.pop_back();
      comp.push_back(b);
      for (int nb : adj[static_cast<size_t>(b)]) {
        if (!visited[static_cast<size_t>(nb)]) {
          visited[static_cast<size_t>(nb)] = true;
          stack.push_back(nb);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;
}

void GridCase::validate(std::vector<std::string>* warnings) const {
  if (base_mva <= 0) throw InvalidInput("base MVA must be positive");
  if (buses.empty()) throw InvalidInput("case has no buses");

  const Index n = bus_count();
  std::set<int> ids;
  int reference_count = 0;
  for (const Bus& b : buses) {
    if (!ids.insert(b.id).second) {
      throw InvalidInput("duplicate bus id " + std::to_string(b.id));
    }
    if (b.id < 0 || b.id >= n) {
      throw InvalidInput("bus ids must be contiguous 0.." + std::to_string(n - 1) +
                         "; found " + std::to_string(b.id));
    }
    if (b.is_reference) ++reference_count;
  }
  if (reference_count != 1) {
    throw InvalidInput("exactly one reference bus required, found " +
                       std::to_string(reference_count));
  }

  auto check_bus_ref = [&](int bus, const std::string& owner) {
    if (bus < 0 || bus >= n || !ids.count(bus)) {
      throw InvalidInput(owner + " references missing bus " + std::to_string(bus));
    }
  };

  std::set<std::pair<int, int>> line_pairs;
  for (size_t i = 0; i < lines.size(); ++i) {
    const Line& l = lines[i];
    const std::string name = "line " + std::to_string(i) + " (" +
                             std::to_string(l.from) + "," + std::to_string(l.to) + ")";
    check_bus_ref(l.from, name);
    check_bus_ref(l.to, name);
    if (l.from == l.to) throw InvalidInput(name + " is a self-loop");
    if (!(l.susceptance > 0)) throw InvalidInput(name + ": susceptance must be > 0");
    if (!(l.capacity_mw > 0)) throw InvalidInput(name + ": capacity must be > 0");
    if (!(l.eps > 0 && l.eps < 0.5)) {
      throw InvalidInput(name + ": eps must lie in (0, 0.5)");
    }
    const auto key = std::minmax(l.from, l.to);
    if (!line_pairs.insert(key).second && warnings) {
      warnings->push_back("parallel " + name + " present; run normalize() to merge");
    }
  }

  for (const Generator& g : generators) {
    const std::string name = "generator " + std::to_string(g.id);
    check_bus_ref(g.bus, name);
    if (g.p_min_mw > g.p_max_mw) throw InvalidInput(name + ": p_min > p_max");
    if (g.ramp_up_mw < 0 || g.ramp_down_mw < 0) {
      throw InvalidInput(name + ": ramp limits must be >= 0");
    }
    if (g.cost_quad < 0) throw InvalidInput(name + ": quadratic cost must be >= 0");
    if (!(g.eps > 0 && g.eps < 0.5)) {
      throw InvalidInput(name + ": eps must lie in (0, 0.5)");
    }
    if (!g.dispatchable &&
        (g.fixed_output_mw < g.p_min_mw || g.fixed_output_mw > g.p_max_mw)) {
      throw InvalidInput(name + ": fixed output outside [p_min, p_max]");
    }
    if (g.alpha_policy == AlphaPolicy::Fixed && g.alpha_value < 0) {
      throw InvalidInput(name + ": fixed participation factor must be >= 0");
    }
  }

  std::set<int> wind_buses;
  for (const WindFarm& w : wind_farms) {
    const std::string name = "wind farm at bus " + std::to_string(w.bus);
    check_bus_ref(w.bus, name);
    if (w.forecast_mw < 0) throw InvalidInput(name + ": forecast must be >= 0");
    if (!wind_buses.insert(w.bus).second) {
      throw InvalidInput(name + " duplicated; run normalize() to aggregate");
    }
  }

  for (int li : monitored_lines) {
    if (li < 0 || static_cast<size_t>(li) >= lines.size()) {
      throw InvalidInput("monitored line index " + std::to_string(li) +
                         " out of range");
    }
  }

  const auto components = connected_components(n, lines);
  if (components.size() > 1) {
    const auto& isolated = components[1];
    throw InvalidInput(
        "network is disconnected: component containing bus " +
        std::to_string(isolated.front()) + " (" + std::to_string(isolated.size()) +
        " buses) is isolated from the component of bus " +
        std::to_string(components[0].front()));
  }
}

std::vector<std::string> GridCase::normalize() {
  std::vector<std::string> warnings;

  // Merge parallel lines. Susceptances add; the merged capacity is the total
  // flow at which the tightest member reaches its own limit, since flow
  // splits in proportion to susceptance.
  std::map<std::pair<int, int>, Line> merged;
  std::vector<std::pair<int, int>> order;
  for (const Line& l : lines) {
    const auto key = std::minmax(l.from, l.to);
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(key, l);
      order.push_back(key);
    } else {
      Line& m = it->second;
      const double ratio_existing = m.capacity_mw / m.susceptance;
      const double ratio_new = l.capacity_mw / l.susceptance;
      m.susceptance += l.susceptance;
      m.capacity_mw = std::min(ratio_existing, ratio_new) * m.susceptance;
      m.eps = std::min(m.eps, l.eps);
      warnings.push_back("merged parallel line (" + std::to_string(l.from) + "," +
                         std::to_string(l.to) + ") by susceptance addition");
    }
  }
  if (!warnings.empty() && !monitored_lines.empty()) {
    throw InvalidInput("monitored-line indices cannot be combined with parallel "
                       "lines; merge the lines in the input first");
  }
  if (merged.size() != lines.size()) {
    lines.clear();
    for (const auto& key : order) lines.push_back(merged.at(key));
  }

  // Aggregate co-located wind farms: forecasts add.
  std::map<int, double> wind_by_bus;
  std::vector<int> wind_order;
  for (const WindFarm& w : wind_farms) {
    if (!wind_by_bus.count(w.bus)) wind_order.push_back(w.bus);
    else
      warnings.push_back("aggregated co-located wind farm at bus " +
                         std::to_string(w.bus));
    wind_by_bus[w.bus] += w.forecast_mw;
  }
  if (wind_by_bus.size() != wind_farms.size()) {
    wind_farms.clear();
    for (int bus : wind_order) wind_farms.push_back({bus, wind_by_bus.at(bus)});
  }

  return warnings;
}

}  // namespace rccopf
