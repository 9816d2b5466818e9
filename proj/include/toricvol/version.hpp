#pragma once

namespace toricvol {

#ifndef TORICVOL_VERSION
#define TORICVOL_VERSION "v1.0.0"
#endif

inline const char* version() { return "toricvol " TORICVOL_VERSION; }

}  // namespace toricvol
