#pragma once

#include <memory>

#include <spdlog/logger.h>

namespace silico {

/// Shared stderr logger. Level comes from SILICO_LOG (trace..off), default warn.
spdlog::logger& log();

}  // namespace silico
