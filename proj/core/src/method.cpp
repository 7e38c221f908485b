#include "splitlab/method.hpp"

namespace splitlab {

std::string_view method_id(Method m) {
  switch (m) {
    case Method::centralized: return "centralized";
    case Method::fl: return "fl";
    case Method::sl_ls_ac: return "sl_ls_ac";
    case Method::sl_ls_am: return "sl_ls_am";
    case Method::sl_nls_ac: return "sl_nls_ac";
    case Method::sl_nls_am: return "sl_nls_am";
    case Method::sflv2_ls: return "sflv2_ls";
    case Method::sflv2_nls: return "sflv2_nls";
    case Method::sflv3_ls: return "sflv3_ls";
    case Method::sflv3_nls: return "sflv3_nls";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view id) {
  for (Method m : kAllMethods) {
    if (method_id(m) == id) return m;
  }
  return std::nullopt;
}

bool is_split_method(Method m) { return m != Method::centralized && m != Method::fl; }

std::optional<Topology> method_topology(Method m) {
  switch (m) {
    case Method::sl_ls_ac:
    case Method::sl_ls_am:
    case Method::sflv2_ls:
    case Method::sflv3_ls: return Topology::ls;
    case Method::sl_nls_ac:
    case Method::sl_nls_am:
    case Method::sflv2_nls:
    case Method::sflv3_nls: return Topology::nls;
    default: return std::nullopt;
  }
}

std::string_view topology_id(Topology t) { return t == Topology::ls ? "ls" : "nls"; }

}  // namespace splitlab
