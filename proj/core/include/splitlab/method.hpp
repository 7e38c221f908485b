#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace splitlab {

/// The ten training procedures the lab can run.
enum class Method {
  centralized,
  fl,
  sl_ls_ac,
  sl_ls_am,
  sl_nls_ac,
  sl_nls_am,
  sflv2_ls,
  sflv2_nls,
  sflv3_ls,
  sflv3_nls,
};

inline constexpr std::array<Method, 10> kAllMethods = {
    Method::centralized, Method::fl,       Method::sl_ls_ac,  Method::sl_ls_am,
    Method::sl_nls_ac,   Method::sl_nls_am, Method::sflv2_ls, Method::sflv2_nls,
    Method::sflv3_ls,    Method::sflv3_nls,
};

enum class Topology { ls, nls };
enum class Schedule { ac, am };

std::string_view method_id(Method m);
std::optional<Method> parse_method(std::string_view id);

bool is_split_method(Method m);
/// Topology of a split method; nullopt for centralized and FL.
std::optional<Topology> method_topology(Method m);

std::string_view topology_id(Topology t);

}  // namespace splitlab
