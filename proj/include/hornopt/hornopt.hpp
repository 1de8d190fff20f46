#pragma once

#include "hornopt/error.hpp"
#include "hornopt/logic.hpp"
#include "hornopt/parser.hpp"
#include "hornopt/analysis.hpp"
#include "hornopt/grounding.hpp"
#include "hornopt/spec.hpp"
#include "hornopt/search.hpp"
#include "hornopt/flow.hpp"
#include "hornopt/catalog.hpp"
