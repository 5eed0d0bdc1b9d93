// SPDX-License-Identifier: Apache-2.0

#ifndef ISAC_ISAC_HPP
#define ISAC_ISAC_HPP

#include "isac/allocate.hpp"
#include "isac/channel.hpp"
#include "isac/config.hpp"
#include "isac/core.hpp"
#include "isac/csv.hpp"
#include "isac/error.hpp"
#include "isac/harness.hpp"
#include "isac/random.hpp"
#include "isac/sensing.hpp"
#include "isac/svg.hpp"

#endif // ISAC_ISAC_HPP
