//! Namespace constants shared by the store, the query layer and the generator.

pub const GEO: &str = "http://www.opengis.net/ont/geosparql#";
pub const GEOF: &str = "http://www.opengis.net/def/function/geosparql/";
pub const UOM: &str = "http://www.opengis.net/def/uom/OGC/1.0/";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";

/// Ontology namespace of the bundled knowledge graph.
pub const EO: &str = "http://example.org/eoqa/ontology#";
/// Resource namespace of the bundled knowledge graph.
pub const EOR: &str = "http://example.org/eoqa/resource/";

/// Prefixes every query may use without declaring them.
pub const PREDECLARED_PREFIXES: &[(&str, &str)] = &[
    ("geo", GEO),
    ("geof", GEOF),
    ("uom", UOM),
    ("xsd", XSD),
    ("rdf", RDF),
    ("rdfs", RDFS),
];

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const RDFS_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
pub const RDFS_RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
pub const RDFS_CLASS: &str = "http://www.w3.org/2000/01/rdf-schema#Class";
pub const RDF_PROPERTY: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Property";
pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
pub const OWL_DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";
pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";

pub const GEO_HAS_GEOMETRY: &str = "http://www.opengis.net/ont/geosparql#hasGeometry";
pub const GEO_AS_WKT: &str = "http://www.opengis.net/ont/geosparql#asWKT";
pub const GEO_WKT_LITERAL: &str = "http://www.opengis.net/ont/geosparql#wktLiteral";
pub const GEO_SF_WITHIN: &str = "http://www.opengis.net/ont/geosparql#sfWithin";
pub const GEO_SF_CONTAINS: &str = "http://www.opengis.net/ont/geosparql#sfContains";
pub const GEO_SF_INTERSECTS: &str = "http://www.opengis.net/ont/geosparql#sfIntersects";

pub const GEOF_SF_WITHIN: &str = "http://www.opengis.net/def/function/geosparql/sfWithin";
pub const GEOF_SF_CONTAINS: &str = "http://www.opengis.net/def/function/geosparql/sfContains";
pub const GEOF_SF_INTERSECTS: &str = "http://www.opengis.net/def/function/geosparql/sfIntersects";
pub const GEOF_DISTANCE: &str = "http://www.opengis.net/def/function/geosparql/distance";
pub const UOM_METRE: &str = "http://www.opengis.net/def/uom/OGC/1.0/metre";

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_FLOAT: &str = "http://www.w3.org/2001/XMLSchema#float";
pub const XSD_DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";

pub const EO_FEATURE: &str = "http://example.org/eoqa/ontology#Feature";
pub const EO_IMAGE: &str = "http://example.org/eoqa/ontology#Image";
pub const EO_SYNONYM: &str = "http://example.org/eoqa/ontology#synonym";
pub const EO_TIMESTAMP: &str = "http://example.org/eoqa/ontology#timestamp";
pub const EO_LINK: &str = "http://example.org/eoqa/ontology#link";
pub const EO_LENGTH: &str = "http://example.org/eoqa/ontology#length";
pub const EO_AREA: &str = "http://example.org/eoqa/ontology#area";

/// Shortens `iri` to `prefix:local` when a predeclared prefix applies and the
/// local part is a plain name.
pub fn compact(iri: &str) -> Option<String> {
    for (prefix, ns) in PREDECLARED_PREFIXES {
        if let Some(local) = iri.strip_prefix(ns) {
            if is_plain_local(local) {
                return Some(format!("{prefix}:{local}"));
            }
        }
    }
    None
}

/// Expands `prefix:local` against the predeclared prefixes.
pub fn expand(prefix: &str, local: &str) -> Option<String> {
    PREDECLARED_PREFIXES
        .iter()
        .find(|(p, _)| *p == prefix)
        .map(|(_, ns)| format!("{ns}{local}"))
}

fn is_plain_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compacts_known_prefixes() {
        assert_eq!(compact(GEO_AS_WKT).as_deref(), Some("geo:asWKT"));
        assert_eq!(compact(UOM_METRE).as_deref(), Some("uom:metre"));
        assert_eq!(compact(EO_FEATURE), None);
        assert_eq!(compact("http://www.opengis.net/ont/geosparql#a/b"), None);
    }

    #[test]
    fn expand_inverts_compact() {
        assert_eq!(expand("geof", "distance").as_deref(), Some(GEOF_DISTANCE));
        assert_eq!(expand("nope", "x"), None);
    }
}
