#pragma once

#include "pnlattr/attribution.hpp"
#include "pnlattr/date.hpp"
#include "pnlattr/error.hpp"
#include "pnlattr/market_data.hpp"
#include "pnlattr/path_oracle.hpp"
#include "pnlattr/pricers.hpp"
#include "pnlattr/report.hpp"
