#include <deque>
#include <fstream>
#include <set>

#include "sdnshield/errors.hpp"
#include "sdnshield/sdnsim.hpp"
#include "sdnshield/strings.hpp"

namespace sdnshield::sdnsim {

int match_count(const HostTuple& a, const HostTuple& b) {
  int n = 0;
  n += a.ip == b.ip;
  n += a.mac == b.mac;
  n += a.attach == b.attach;
  return n;
}

TopologySpec parse_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open '" + path + "'");

  TopologySpec spec;
  enum class Section { kNone, kSwitches, kLinks, kHosts, kGateway };
  Section section = Section::kNone;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (s.front() == '[') {
      if (s == "[switches]") section = Section::kSwitches;
      else if (s == "[links]") section = Section::kLinks;
      else if (s == "[hosts]") section = Section::kHosts;
      else if (s == "[gateway]") section = Section::kGateway;
      else throw UserError(where + ": unknown section " + s);
      continue;
    }
    std::vector<std::string> parts;
    for (const std::string& p : split(s, ' '))
      if (!trim(p).empty()) parts.push_back(trim(p));
    switch (section) {
      case Section::kNone:
        throw UserError(where + ": content before any section");
      case Section::kSwitches:
        if (parts.size() != 1) throw UserError(where + ": one switch id per line");
        spec.switches.push_back(parts[0]);
        break;
      case Section::kLinks:
        if (parts.size() != 2) throw UserError(where + ": links need two switch ids");
        spec.links.emplace_back(parts[0], parts[1]);
        break;
      case Section::kHosts:
        if (parts.size() != 3)
          throw UserError(where + ": host rows are 'ip mac switch:port'");
        spec.hosts.push_back({parts[0], parts[1], parts[2]});
        break;
      case Section::kGateway:
        if (parts.size() != 1 || !spec.gateway.empty())
          throw UserError(where + ": gateway is a single switch id");
        spec.gateway = parts[0];
        break;
    }
  }
  return spec;
}

void write_topology_file(const std::string& path, const TopologySpec& spec) {
  std::ofstream out(path);
  if (!out) throw UserError("cannot write '" + path + "'");
  out << "[switches]\n";
  for (const std::string& s : spec.switches) out << s << "\n";
  out << "\n[links]\n";
  for (const auto& [a, b] : spec.links) out << a << ' ' << b << "\n";
  out << "\n[hosts]\n";
  for (const HostTuple& h : spec.hosts)
    out << h.ip << ' ' << h.mac << ' ' << h.attach << "\n";
  out << "\n[gateway]\n" << spec.gateway << "\n";
  if (!out) throw UserError("write failed for '" + path + "'");
}

const HostTuple* Network::find_host(const std::string& ip) const {
  auto it = host_by_ip.find(ip);
  if (it == host_by_ip.end()) return nullptr;
  return &spec.hosts[it->second];
}

Network build_topology(const TopologySpec& spec) {
  if (spec.switches.empty()) throw UserError("topology: no switches");

  Network net;
  net.spec = spec;
  for (std::size_t i = 0; i < spec.switches.size(); ++i) {
    if (!net.switch_index.emplace(spec.switches[i], static_cast<int>(i)).second)
      throw UserError("topology: duplicate switch " + spec.switches[i]);
  }

  const int n = static_cast<int>(spec.switches.size());
  std::vector<std::vector<int>> adjacent(n);
  for (const auto& [a, b] : spec.links) {
    const auto ia = net.switch_index.find(a);
    const auto ib = net.switch_index.find(b);
    if (ia == net.switch_index.end() || ib == net.switch_index.end())
      throw UserError("topology: link references unknown switch " +
                      (ia == net.switch_index.end() ? a : b));
    if (ia->second == ib->second)
      throw UserError("topology: self-link on " + a);
    adjacent[ia->second].push_back(ib->second);
    adjacent[ib->second].push_back(ia->second);
  }

  std::set<std::string> attach_points;
  for (std::size_t h = 0; h < spec.hosts.size(); ++h) {
    const HostTuple& host = spec.hosts[h];
    if (!net.host_by_ip.emplace(host.ip, static_cast<int>(h)).second)
      throw UserError("topology: duplicate host ip " + host.ip);
    if (!attach_points.insert(host.attach).second)
      throw UserError("topology: attach point " + host.attach + " used twice");
    const std::size_t colon = host.attach.find(':');
    if (colon == std::string::npos)
      throw UserError("topology: attach '" + host.attach + "' is not switch:port");
    const std::string sw = host.attach.substr(0, colon);
    const auto it = net.switch_index.find(sw);
    if (it == net.switch_index.end())
      throw UserError("topology: host " + host.ip + " attaches to unknown switch " + sw);
    net.host_switch.push_back(it->second);
  }

  if (spec.gateway.empty()) throw UserError("topology: no gateway designated");
  const auto gw = net.switch_index.find(spec.gateway);
  if (gw == net.switch_index.end())
    throw UserError("topology: gateway " + spec.gateway + " is not a switch");
  net.gateway = gw->second;

  // All-pairs next hops by BFS from each switch, neighbors in declaration
  // order so the tables are reproducible.
  net.next_hop.assign(n, std::vector<int>(n, -1));
  for (int from = 0; from < n; ++from) {
    std::vector<int> parent(n, -1);
    std::vector<char> seen(n, 0);
    std::deque<int> queue{from};
    seen[from] = 1;
    while (!queue.empty()) {
      const int cur = queue.front();
      queue.pop_front();
      for (int next : adjacent[cur]) {
        if (seen[next]) continue;
        seen[next] = 1;
        parent[next] = cur;
        queue.push_back(next);
      }
    }
    for (int to = 0; to < n; ++to) {
      if (to == from) {
        net.next_hop[from][to] = from;
        continue;
      }
      if (!seen[to])
        throw UserError("topology: switches " + spec.switches[from] + " and " +
                        spec.switches[to] + " are disconnected");
      int step = to;
      while (parent[step] != from) step = parent[step];
      net.next_hop[from][to] = step;
    }
  }
  return net;
}

}  // namespace sdnshield::sdnsim
