#pragma once

#include "fairslot/core.hpp"
#include "fairslot/errors.hpp"
#include "fairslot/fairness_audit.hpp"
#include "fairslot/feasibility.hpp"
#include "fairslot/json_io.hpp"
#include "fairslot/kunit.hpp"
#include "fairslot/oracles.hpp"
#include "fairslot/payments.hpp"
#include "fairslot/position.hpp"
#include "fairslot/welfare.hpp"
