#include "shotvod/profiles.hpp"

#include <array>
#include <string>

#include "shotvod/error.hpp"

namespace shotvod {

namespace {

constexpr std::array<ReferenceProfile, 6> kProfiles = {{
    {77212, 0.78, 1.02, 97, 7.9735, 1.0145},
    {77213, 9.79, 30.9, 1198, 30.002, 10.518},
    {77214, 5.31, 15.3, 650, 16.787, 4.896},
    {77215, 9.37, 31.7, 1146, 26.226, 9.368},
    {77216, 9.48, 31.8, 1160, 29.376, 8.778},
    {73999, 104.78, 169.8, 12810, 271.607, 91.875},
}};

}  // namespace

std::span<const ReferenceProfile> reference_profiles() noexcept { return kProfiles; }

const ReferenceProfile& find_profile(ShotId shot_no) {
  for (const auto& p : kProfiles) {
    if (p.shot_no == shot_no) return p;
  }
  throw Error(Errc::unknown_profile, "no reference profile for shot " + std::to_string(shot_no));
}

}  // namespace shotvod
