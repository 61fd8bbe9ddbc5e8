#pragma once

namespace ssl3d::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

int dispatch(int argc, char** argv);

}  // namespace ssl3d::cli
