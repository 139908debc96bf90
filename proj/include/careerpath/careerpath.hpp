#pragma once

#include "careerpath/csv.hpp"
#include "careerpath/dataset.hpp"
#include "careerpath/embedding.hpp"
#include "careerpath/error.hpp"
#include "careerpath/ontology.hpp"
#include "careerpath/parallel.hpp"
#include "careerpath/projection.hpp"
#include "careerpath/ranking.hpp"
#include "careerpath/skill_scorer.hpp"
#include "careerpath/text.hpp"
