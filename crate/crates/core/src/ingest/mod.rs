//! Ingestion of provider schema dumps and documentation pages into enriched
//! resource schemas.

mod coverage;
mod doc;
mod enrich;
mod schema;

pub use coverage::{compute_coverage, CoverageReport, Ratio};
pub use doc::{
    extract_doc_elements, parse_doc_page, ArgEntry, AttrEntry, DocElements, DocPage, DocSection, ExampleEntry,
};
pub use enrich::{
    clean_description, match_and_enrich, normalize_section, Enrichment, MarkerWarning, Orphan, OrphanReason,
};
pub use schema::{
    parse_schema_dump, ArgumentSpec, AttributeSpec, BlockSpec, Cardinality, EnrichedResourceSchema, ExampleSpec,
    RawArgument, RawAttribute, RawBlock, RawSchemaDump,
};

use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("malformed schema dump at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("schema error in `{resource}`: {message}")]
    Schema { resource: String, message: String },
    #[error("documentation page is empty")]
    EmptyPage,
    #[error("documentation page has no `# Resource:` heading")]
    MissingResourceHeading,
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Outcome of ingesting a corpus directory pair.
#[derive(Debug, Default)]
pub struct CorpusIngest {
    pub schemas: Vec<EnrichedResourceSchema>,
    pub orphans: Vec<Orphan>,
    pub marker_warnings: Vec<MarkerWarning>,
    /// Non-fatal problems: skipped pages, schemas without docs and the like.
    pub warnings: Vec<String>,
}

fn read(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn files_with_ext(dir: &Path, ext: &str) -> Result<Vec<std::path::PathBuf>, IngestError> {
    let entries = std::fs::read_dir(dir).map_err(|source| IngestError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut out: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some(ext))
        .collect();
    out.sort();
    Ok(out)
}

/// Ingests every `*.json` schema dump in `schema_dir`, pairing each with the
/// documentation page for the same resource found among `*.md` files in
/// `doc_dir`. Schemas are returned sorted by resource name.
///
/// Malformed schema dumps abort the run; unusable documentation pages are
/// skipped with a warning and their resources keep empty descriptions.
pub fn ingest_corpus(schema_dir: &Path, doc_dir: &Path) -> Result<CorpusIngest, IngestError> {
    use rayon::prelude::*;

    let mut dumps = Vec::new();
    for path in files_with_ext(schema_dir, "json")? {
        let text = read(&path)?;
        let dump = parse_schema_dump(&text).map_err(|e| match e {
            IngestError::Parse { path: p, message } => IngestError::Parse {
                path: format!("{}:{}", path.display(), p),
                message,
            },
            other => other,
        })?;
        dumps.push(dump);
    }
    dumps.sort_by(|a, b| a.resource_name.cmp(&b.resource_name));

    let mut out = CorpusIngest::default();
    let mut pages = std::collections::BTreeMap::new();
    for path in files_with_ext(doc_dir, "md")? {
        let text = read(&path)?;
        match parse_doc_page(&text) {
            Ok(page) => {
                pages.insert(page.resource_name.clone(), page);
            }
            Err(e) => out.warnings.push(format!("skipped {}: {e}", path.display())),
        }
    }

    let results: Vec<_> = dumps
        .par_iter()
        .map(|dump| match pages.get(&dump.resource_name) {
            Some(page) => {
                let elements = extract_doc_elements(page);
                (match_and_enrich(dump, &page.description, &elements), None)
            }
            None => (
                match_and_enrich(dump, "", &DocElements::default()),
                Some(format!("no documentation page for {}", dump.resource_name)),
            ),
        })
        .collect();
    for (enrichment, warning) in results {
        out.warnings.extend(warning);
        out.orphans.extend(enrichment.orphans);
        out.marker_warnings.extend(enrichment.marker_warnings);
        out.schemas.push(enrichment.schema);
    }
    Ok(out)
}

/// Chunks every `*.md` page in `doc_dir`, attributing chunks to the page's
/// resource. Pages are read in file-name order; unusable pages are skipped.
pub fn chunk_corpus_docs(doc_dir: &Path) -> Result<Vec<crate::semantic::DocChunk>, IngestError> {
    let mut out = Vec::new();
    for path in files_with_ext(doc_dir, "md")? {
        let text = read(&path)?;
        if let Ok(page) = parse_doc_page(&text) {
            out.extend(crate::semantic::chunk_document(&page.resource_name, &text));
        }
    }
    Ok(out)
}
