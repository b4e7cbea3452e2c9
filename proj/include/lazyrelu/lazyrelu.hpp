#pragma once

#include "lazyrelu/rational.hpp"
#include "lazyrelu/network.hpp"
#include "lazyrelu/property.hpp"
#include "lazyrelu/problem.hpp"
#include "lazyrelu/simplex.hpp"
#include "lazyrelu/search.hpp"
#include "lazyrelu/oracle.hpp"
#include "lazyrelu/bench.hpp"
