#pragma once

// Convenience umbrella for the whole library.

#include "gasgraph/dataset.hpp"
#include "gasgraph/defaults.hpp"
#include "gasgraph/errors.hpp"
#include "gasgraph/esom_export.hpp"
#include "gasgraph/geo.hpp"
#include "gasgraph/geojson.hpp"
#include "gasgraph/georef.hpp"
#include "gasgraph/matcher.hpp"
#include "gasgraph/stats.hpp"
#include "gasgraph/temporal.hpp"
#include "gasgraph/topology.hpp"
#include "gasgraph/transition.hpp"
