#pragma once

#include <cran/channel.hpp>
#include <cran/dual.hpp>
#include <cran/greedy.hpp>
#include <cran/harness.hpp>
#include <cran/io.hpp>
#include <cran/line_search.hpp>
#include <cran/model.hpp>
#include <cran/persc.hpp>
#include <cran/power.hpp>
