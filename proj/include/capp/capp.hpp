#pragma once

#include "capp/automation_report.hpp"
#include "capp/conditions.hpp"
#include "capp/fitting.hpp"
#include "capp/json_io.hpp"
#include "capp/match_engine.hpp"
#include "capp/ose_db.hpp"
#include "capp/part_model.hpp"
#include "capp/pipeline.hpp"
#include "capp/service.hpp"
#include "capp/session.hpp"
#include "capp/setup_plan.hpp"
#include "capp/transform.hpp"
