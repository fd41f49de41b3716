#pragma once

#include <ygg/analysis.hpp>
#include <ygg/client.hpp>
#include <ygg/cloud.hpp>
#include <ygg/errors.hpp>
#include <ygg/harness.hpp>
#include <ygg/io.hpp>
#include <ygg/metrics.hpp>
#include <ygg/policy.hpp>
#include <ygg/symstring.hpp>
