// Schema-driven model for the educator catalog editor.
//
// The categories and fields mirror the gateway's closed catalog schema;
// values always round-trip through GET/PUT, the form only shapes them.

import type { CatalogDocument } from "./types.js";

export interface CatalogField {
  category: string;
  field: string;
  label: string;
  kind: "text" | "integer";
}

const CATEGORIES: Record<string, string[]> = {
  student_profile: ["background", "academic_performance", "needs_and_barriers"],
  instructor_preferences: ["emphasis", "style", "assessment_focus"],
  course_structure: ["learning_outcomes", "duration", "weekly_outline"],
  assessment_design: ["format_preferences", "delivery_constraints"],
  teaching_constraints: ["platform_policy", "ta_support", "delivery_context", "max_slide_count"],
  institutional_requirements: ["program_outcomes", "academic_policies", "department_syllabus"],
};

function labelize(name: string): string {
  return name.replace(/_/g, " ").replace(/\b\w/g, (c) => c.toUpperCase());
}

export function catalogFields(): CatalogField[] {
  const fields: CatalogField[] = [];
  for (const [category, names] of Object.entries(CATEGORIES)) {
    for (const field of names) {
      fields.push({
        category,
        field,
        label: `${labelize(category)}: ${labelize(field)}`,
        kind: field === "max_slide_count" ? "integer" : "text",
      });
    }
  }
  fields.push({
    category: "prior_feedback",
    field: "prior_feedback",
    label: "Prior Feedback",
    kind: "text",
  });
  return fields;
}

export type FormValues = Record<string, string>;

function key(category: string, field: string): string {
  return category === "prior_feedback" ? "prior_feedback" : `${category}.${field}`;
}

export function valuesFromCatalog(catalog: CatalogDocument): FormValues {
  const values: FormValues = {};
  for (const spec of catalogFields()) {
    if (spec.category === "prior_feedback") {
      const feedback = catalog["prior_feedback"];
      if (typeof feedback === "string") values[key(spec.category, spec.field)] = feedback;
      continue;
    }
    const category = catalog[spec.category];
    if (category && typeof category === "object") {
      const value = (category as Record<string, unknown>)[spec.field];
      if (value !== undefined && value !== null) {
        values[key(spec.category, spec.field)] = String(value);
      }
    }
  }
  return values;
}

export function catalogFromValues(values: FormValues): CatalogDocument {
  const document: CatalogDocument = {};
  for (const spec of catalogFields()) {
    const raw = (values[key(spec.category, spec.field)] ?? "").trim();
    if (!raw) continue;
    if (spec.category === "prior_feedback") {
      document["prior_feedback"] = raw;
      continue;
    }
    const category = (document[spec.category] ?? {}) as Record<string, unknown>;
    category[spec.field] = spec.kind === "integer" ? Number.parseInt(raw, 10) : raw;
    document[spec.category] = category;
  }
  return document;
}
