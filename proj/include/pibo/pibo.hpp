#pragma once

// Core library. pibo/config.hpp (JSON run configs) additionally needs nlohmann/json.
#include "pibo/acquisition.hpp"
#include "pibo/bo_engine.hpp"
#include "pibo/dataset.hpp"
#include "pibo/errors.hpp"
#include "pibo/gp.hpp"
#include "pibo/io.hpp"
#include "pibo/oracle_bench.hpp"
#include "pibo/orchestrator.hpp"
#include "pibo/rng.hpp"
#include "pibo/search_space.hpp"
#include "pibo/stripline.hpp"
