//! Structural semantic slices of one commit.
//!
//! Each record ties a source module/class (and, where found, the method
//! using the dependency) to a connected or disconnected target. Categories:
//! 1 descriptor operation, 2 added class, 3 deleted class, 4 modified
//! class, 5 changed class with no cross-module relation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::detect::{ChangeAction, DescriptorDiff, DirectiveChange, M2MVerdict};
use crate::diag::Diagnostics;
use crate::lexical::{blank_literals, extract_methods, file_stem, identifier_tokens, is_keyword, Language, MethodSpan};
use crate::normalize::{Dependency, NormalizedImportDelta, TargetModule};
use crate::resolver::ClassIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Connected,
    Disconnected,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Connected => "connected",
            Relation::Disconnected => "disconnected",
        }
    }

    pub fn arrow(self) -> &'static str {
        match self {
            Relation::Connected => "<-",
            Relation::Disconnected => "-x-",
        }
    }

    pub fn parse(s: &str) -> Option<Relation> {
        match s {
            "connected" => Some(Relation::Connected),
            "disconnected" => Some(Relation::Disconnected),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MemberContext {
    Added,
    Deleted,
    Modified,
    None,
}

impl MemberContext {
    pub fn as_str(self) -> &'static str {
        match self {
            MemberContext::Added => "added",
            MemberContext::Deleted => "deleted",
            MemberContext::Modified => "modified",
            MemberContext::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<MemberContext> {
        match s {
            "added" => Some(MemberContext::Added),
            "deleted" => Some(MemberContext::Deleted),
            "modified" => Some(MemberContext::Modified),
            "none" => Some(MemberContext::None),
            _ => None,
        }
    }

    fn of_action(action: ChangeAction) -> MemberContext {
        match action {
            ChangeAction::Added => MemberContext::Added,
            ChangeAction::Deleted => MemberContext::Deleted,
            ChangeAction::Modified | ChangeAction::Moved => MemberContext::Modified,
        }
    }
}

/// Source class name used for descriptor records.
pub const DESCRIPTOR_CLASS: &str = "module-info";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceRecord {
    pub category: u8,
    /// Absent only for a changed file outside every module.
    pub source_module: Option<String>,
    pub source_class: String,
    pub member: Option<String>,
    pub member_context: MemberContext,
    /// Absent for category 5.
    pub relation: Option<Relation>,
    pub target_module: Option<String>,
    pub target_class: Option<String>,
    pub ambiguity: bool,
    pub evidence_lines: Vec<usize>,
    /// `MO(op,target)` for category 1.
    pub operation: Option<String>,
}

/// Identity of a slice instance: source module, source class, member (the
/// operation for descriptor records), target module, target class.
pub type InstanceKey = (String, String, String, String, String);

impl SliceRecord {
    pub fn instance_key(&self) -> Option<InstanceKey> {
        if self.category == 5 {
            return None;
        }
        let member = self
            .member
            .clone()
            .or_else(|| self.operation.clone())
            .unwrap_or_default();
        Some((
            self.source_module.clone().unwrap_or_default(),
            self.source_class.clone(),
            member,
            self.target_module.clone().unwrap_or_default(),
            self.target_class.clone().unwrap_or_default(),
        ))
    }

    /// Checks the per-record invariants; returns the violated one.
    pub fn validate(&self) -> Result<(), String> {
        match self.category {
            1 if self.member.is_some() || self.target_class.is_some() => {
                Err("category 1 carries a member or target class".into())
            }
            5 if self.target_module.is_some() || self.relation.is_some() => Err("category 5 carries a target".into()),
            2 if self.relation != Some(Relation::Connected) => Err("category 2 must be connected".into()),
            3 if self.relation != Some(Relation::Disconnected) => Err("category 3 must be disconnected".into()),
            1..=5 => Ok(()),
            c => Err(format!("unknown category {c}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceDocument {
    pub commit_id: String,
    pub verdict: M2MVerdict,
    pub slices: Vec<SliceRecord>,
    pub non_m2m_classes: Vec<String>,
}

impl SliceDocument {
    /// Distinct instances over categories 1-4.
    pub fn instances(&self) -> BTreeSet<InstanceKey> {
        self.slices.iter().filter_map(SliceRecord::instance_key).collect()
    }
}

/// Short names for rendering. Applied to module and class names alike.
pub type AliasMap = BTreeMap<String, String>;

fn alias<'a>(aliases: &'a AliasMap, name: &'a str) -> &'a str {
    aliases.get(name).map_or(name, String::as_str)
}

/// One-line text form: `SRC:CLASS=>MEMBER<-TGT:CLASS`, `-x-` for a
/// disconnected relation, `MODULE=>MO(op,target)<-TGT` for descriptor
/// records, bare `SRC:CLASS` for category 5.
pub fn render_slice_text(record: &SliceRecord, aliases: &AliasMap) -> String {
    let src_module = record.source_module.as_deref().map_or("", |m| alias(aliases, m));
    let mut out = String::new();
    if record.category == 1 {
        out.push_str(src_module);
        out.push_str("=>");
        out.push_str(record.operation.as_deref().unwrap_or("MO()"));
    } else {
        out.push_str(src_module);
        out.push(':');
        out.push_str(alias(aliases, &record.source_class));
        if let Some(member) = &record.member {
            out.push_str("=>");
            out.push_str(member);
        }
    }
    if let Some(rel) = record.relation {
        out.push_str(rel.arrow());
        out.push_str(record.target_module.as_deref().map_or("", |m| alias(aliases, m)));
        if let Some(class) = &record.target_class {
            out.push(':');
            out.push_str(alias(aliases, class));
        }
    }
    out
}

/// The fields a rendered line carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceText {
    pub source_module: Option<String>,
    pub source_class: Option<String>,
    pub member: Option<String>,
    pub operation: Option<String>,
    pub relation: Option<Relation>,
    pub target_module: Option<String>,
    pub target_class: Option<String>,
}

impl SliceText {
    pub fn of(record: &SliceRecord) -> SliceText {
        let descriptor = record.category == 1;
        SliceText {
            source_module: record.source_module.clone(),
            source_class: (!descriptor).then(|| record.source_class.clone()),
            member: record.member.clone(),
            operation: record.operation.clone().filter(|_| descriptor),
            relation: record.relation,
            target_module: record.target_module.clone(),
            target_class: record.target_class.clone(),
        }
    }
}

fn non_empty(s: &str) -> Option<String> {
    (!s.is_empty()).then(|| s.to_string())
}

/// Inverse of [`render_slice_text`] without aliases.
pub fn parse_slice_text(line: &str) -> Option<SliceText> {
    let (left, relation, right) = match (line.find("-x-"), line.find("<-")) {
        (Some(i), _) => (&line[..i], Some(Relation::Disconnected), Some(&line[i + 3..])),
        (None, Some(i)) => (&line[..i], Some(Relation::Connected), Some(&line[i + 2..])),
        (None, None) => (line, None, None),
    };
    let mut text = SliceText {
        source_module: None,
        source_class: None,
        member: None,
        operation: None,
        relation,
        target_module: None,
        target_class: None,
    };
    match left.split_once("=>") {
        Some((module, op)) if op.starts_with("MO(") && op.ends_with(')') => {
            text.source_module = non_empty(module);
            text.operation = Some(op.to_string());
        }
        Some((head, member)) => {
            let (module, class) = head.split_once(':')?;
            text.source_module = non_empty(module);
            text.source_class = Some(class.to_string());
            text.member = Some(member.to_string());
        }
        None => {
            let (module, class) = left.split_once(':')?;
            text.source_module = non_empty(module);
            text.source_class = Some(class.to_string());
        }
    }
    if let Some(right) = right {
        match right.split_once(':') {
            Some((module, class)) => {
                text.target_module = non_empty(module);
                text.target_class = Some(class.to_string());
            }
            None => text.target_module = non_empty(right),
        }
    }
    Some(text)
}

/// Statement-like segments of blanked text: token lists split at `;`, `{`
/// and `}` (and at line ends for Kotlin), with the text of each.
fn segments(blanked: &str, language: Language) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in blanked.char_indices() {
        let split = matches!(c, ';' | '{' | '}') || (c == '\n' && language == Language::Kotlin);
        if split {
            out.push((start, i));
            start = i + c.len_utf8();
        }
    }
    out.push((start, blanked.len()));
    out
}

/// Offset of the first plain assignment `=` (not part of `==`, `!=`,
/// `<=`, `>=`) in a segment.
fn assignment_at(seg: &str) -> Option<usize> {
    let b = seg.as_bytes();
    (0..b.len()).find(|&i| {
        b[i] == b'=' && b.get(i + 1) != Some(&b'=') && !(i > 0 && matches!(b[i - 1], b'=' | b'!' | b'<' | b'>'))
    })
}

fn is_ident_byte(c: u8) -> bool {
    c == b'_' || c == b'$' || c.is_ascii_alphanumeric()
}

/// Name a segment binds, if any: the assigned variable, a `Type name`
/// declaration without initializer, or a Kotlin `val name: Type`.
fn bound_name(seg: &str, language: Language) -> Option<String> {
    let ident_ok = |w: &&str| !is_keyword(w, language) && !w.starts_with(|c: char| c.is_ascii_digit());
    if let Some(eq) = assignment_at(seg) {
        let mut lhs = &seg[..eq];
        if language == Language::Kotlin {
            if let Some(colon) = lhs.find(':') {
                lhs = &lhs[..colon];
            }
        }
        return identifier_tokens(lhs)
            .into_iter()
            .map(|t| t.2)
            .rfind(ident_ok)
            .map(str::to_string);
    }
    if seg.contains('(') {
        return None;
    }
    if language == Language::Kotlin {
        let toks: Vec<&str> = identifier_tokens(seg).into_iter().map(|t| t.2).collect();
        if let Some(i) = toks.iter().position(|t| *t == "val" || *t == "var") {
            return toks.get(i + 1).filter(|w| ident_ok(w)).map(|s| s.to_string());
        }
        return None;
    }
    // Java: `Type name` at the end of the segment
    let trimmed = seg.trim_end();
    let b = trimmed.as_bytes();
    let mut i = b.len();
    while i > 0 && is_ident_byte(b[i - 1]) {
        i -= 1;
    }
    if i == b.len() {
        return None;
    }
    let name = &trimmed[i..];
    let before = trimmed[..i].trim_end();
    let joined = before.len() < i;
    let prev = before.as_bytes().last().copied();
    match prev {
        Some(c) if joined && (is_ident_byte(c) || c == b'>' || c == b']') => {
            let prev_word = identifier_tokens(before).last().map(|t| t.2);
            if prev_word.is_some_and(|w| matches!(w, "package" | "import" | "return" | "throw" | "new")) {
                return None;
            }
            Some(name.to_string()).filter(|n| ident_ok(&n.as_str()))
        }
        _ => None,
    }
}

/// Methods using `target` in a comment-stripped image, with the lines of
/// the use.
///
/// The target's simple name is tracked forward by name: a variable it is
/// assigned to, or that is declared with it as type, and a method whose
/// signature mentions it, become tracked too, until nothing changes. A
/// method uses the target when a tracked name occurs in its span (each
/// occurrence counts for the innermost method).
pub fn find_member_usages(
    class_text: &str,
    methods: &[MethodSpan],
    target: &str,
    language: Language,
) -> Vec<(String, Vec<usize>)> {
    let simple = target.rsplit('.').next().unwrap_or(target);
    if simple.is_empty() || methods.is_empty() {
        return Vec::new();
    }
    let blanked = blank_literals(class_text);
    let segs = segments(&blanked, language);
    let seg_tokens: Vec<BTreeSet<&str>> = segs
        .iter()
        .map(|&(s, e)| identifier_tokens(&blanked[s..e]).into_iter().map(|t| t.2).collect())
        .collect();

    let mut tracked: BTreeSet<String> = BTreeSet::from([simple.to_string()]);
    loop {
        let before = tracked.len();
        for (i, &(s, e)) in segs.iter().enumerate() {
            if seg_tokens[i].iter().any(|t| tracked.contains(*t)) {
                if let Some(name) = bound_name(&blanked[s..e], language) {
                    tracked.insert(name);
                }
            }
        }
        for m in methods {
            let sig: BTreeSet<&str> = identifier_tokens(&m.signature_text).into_iter().map(|t| t.2).collect();
            if sig.iter().any(|t| tracked.contains(*t)) {
                tracked.insert(m.name.clone());
            }
        }
        if tracked.len() == before {
            break;
        }
    }

    let mut hits: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (line, _, tok) in identifier_tokens(&blanked) {
        if !tracked.contains(tok) || is_keyword(tok, language) {
            continue;
        }
        let innermost = methods
            .iter()
            .enumerate()
            .filter(|(_, m)| m.contains(line))
            .min_by_key(|(i, m)| (m.end_line - m.start_line, *i));
        if let Some((i, _)) = innermost {
            hits.entry(i).or_default().insert(line);
        }
    }
    for (i, m) in methods.iter().enumerate() {
        let sig_hit = identifier_tokens(&m.signature_text)
            .iter()
            .any(|t| tracked.contains(t.2));
        if sig_hit {
            hits.entry(i).or_default().insert(m.start_line);
        }
    }
    hits.into_iter()
        .map(|(i, lines)| (methods[i].name.clone(), lines.into_iter().collect()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ClassChangeKind {
    Added,
    Deleted,
    Modified,
}

/// One changed class file as the slicer sees it. A cross-module move is
/// split into a deletion and an addition; other moves are modifications.
#[derive(Debug, Clone)]
pub struct ClassChange {
    pub kind: ClassChangeKind,
    pub path: String,
    pub pre_path: Option<String>,
    pub pre_image: Option<String>,
    pub post_image: Option<String>,
    pub delta: NormalizedImportDelta,
}

impl ClassChange {
    /// Path the change is reported under.
    pub fn report_path(&self) -> &str {
        match self.kind {
            ClassChangeKind::Deleted => self.pre_path.as_deref().unwrap_or(&self.path),
            _ => &self.path,
        }
    }
}

struct Side<'a> {
    image: &'a str,
    path: &'a str,
    module: Option<&'a str>,
    relation: Relation,
}

fn method_names(text: Option<&str>, language: Language) -> BTreeSet<String> {
    text.map(|t| {
        extract_methods(&crate::lexical::strip_comments(t), language, &mut Diagnostics::new())
            .into_iter()
            .map(|m| m.name)
            .collect()
    })
    .unwrap_or_default()
}

fn dependency_records(
    change: &ClassChange,
    side: &Side<'_>,
    deps: Vec<&Dependency>,
    out: &mut Vec<(String, SliceRecord)>,
) {
    let Some(source_module) = side.module else { return };
    let language = Language::of_path(side.path).unwrap_or(Language::Java);
    let stripped = crate::lexical::strip_comments(side.image);
    let methods = extract_methods(&stripped, language, &mut Diagnostics::new());
    let category = match change.kind {
        ClassChangeKind::Added => 2,
        ClassChangeKind::Deleted => 3,
        ClassChangeKind::Modified => 4,
    };
    let other_methods = match (change.kind, side.relation) {
        (ClassChangeKind::Modified, Relation::Connected) => method_names(change.pre_image.as_deref(), language),
        (ClassChangeKind::Modified, Relation::Disconnected) => method_names(change.post_image.as_deref(), language),
        _ => BTreeSet::new(),
    };
    let member_context = |method: &str| match (change.kind, side.relation) {
        (ClassChangeKind::Added, _) => MemberContext::Added,
        (ClassChangeKind::Deleted, _) => MemberContext::Deleted,
        _ if other_methods.contains(method) => MemberContext::Modified,
        (_, Relation::Connected) => MemberContext::Added,
        (_, Relation::Disconnected) => MemberContext::Deleted,
    };
    let source_class = file_stem(side.path).to_string();
    for dep in deps {
        let targets: Vec<&str> = dep
            .target_module
            .candidates()
            .into_iter()
            .filter(|m| *m != source_module)
            .collect();
        if targets.is_empty() {
            continue;
        }
        let usages = if dep.static_only || dep.package_level {
            Vec::new()
        } else {
            find_member_usages(&stripped, &methods, &dep.target_class, language)
        };
        let ambiguity = matches!(dep.target_module, TargetModule::Ambiguous(_));
        for target in targets {
            let base = SliceRecord {
                category,
                source_module: Some(source_module.to_string()),
                source_class: source_class.clone(),
                member: None,
                member_context: MemberContext::None,
                relation: Some(side.relation),
                target_module: Some(target.to_string()),
                target_class: Some(dep.target_class.clone()),
                ambiguity,
                evidence_lines: dep.lines.iter().copied().collect(),
                operation: None,
            };
            if usages.is_empty() {
                out.push((change.report_path().to_string(), base));
                continue;
            }
            for (method, lines) in &usages {
                out.push((
                    change.report_path().to_string(),
                    SliceRecord {
                        member: Some(method.clone()),
                        member_context: member_context(method),
                        evidence_lines: lines.clone(),
                        ..base.clone()
                    },
                ));
            }
        }
    }
}

fn first_line_with(text: Option<&str>, needle: &str) -> Vec<usize> {
    text.and_then(|t| {
        crate::lexical::strip_comments(t)
            .lines()
            .position(|l| l.contains(needle))
            .map(|i| vec![i + 1])
    })
    .unwrap_or_default()
}

fn descriptor_records(
    diff: &DescriptorDiff,
    pre_text: Option<&str>,
    post_text: Option<&str>,
    pre_index: &ClassIndex,
    post_index: &ClassIndex,
    out: &mut Vec<(String, SliceRecord)>,
) {
    for change in crate::detect::directive_changes(diff.pre.as_ref(), diff.post.as_ref()) {
        let relation = if change.action == ChangeAction::Deleted {
            Relation::Disconnected
        } else {
            Relation::Connected
        };
        let (text, index) = if relation == Relation::Connected {
            (post_text, post_index)
        } else {
            (pre_text, pre_index)
        };
        for target in descriptor_targets(&change, index) {
            out.push((
                diff.path.clone(),
                SliceRecord {
                    category: 1,
                    source_module: Some(change.module.clone()),
                    source_class: DESCRIPTOR_CLASS.to_string(),
                    member: None,
                    member_context: MemberContext::of_action(change.action),
                    relation: Some(relation),
                    target_module: Some(target),
                    target_class: None,
                    ambiguity: false,
                    evidence_lines: first_line_with(text, &change.target),
                    operation: Some(format!("MO({},{})", change.op, change.target)),
                },
            ));
        }
    }
}

/// Modules a descriptor change points at: `to` modules of a qualified
/// export/open, the owning module of a service type for uses/provides when
/// the type is in the repository, otherwise the directive target itself.
pub fn descriptor_targets(change: &DirectiveChange, index: &ClassIndex) -> Vec<String> {
    if let Some(to) = change.qualifier().filter(|q| !q.is_empty()) {
        return to.to_vec();
    }
    if matches!(change.op.as_str(), "uses" | "provides") {
        if let Some(m) = index.resolve_qualified(&change.target).module() {
            return vec![m.to_string()];
        }
    }
    vec![change.target.clone()]
}

/// Source images of a descriptor diff, by path.
pub type DescriptorTexts<'a> = BTreeMap<&'a str, (Option<&'a str>, Option<&'a str>)>;

/// Builds the slice document of a commit.
pub fn generate_slices(
    verdict: &M2MVerdict,
    changes: &[ClassChange],
    descriptors: &[DescriptorDiff],
    descriptor_texts: &DescriptorTexts<'_>,
    pre_index: &ClassIndex,
    post_index: &ClassIndex,
) -> SliceDocument {
    let mut keyed: Vec<(String, SliceRecord)> = Vec::new();
    let mut non_m2m = Vec::new();

    if verdict.is_m2m {
        for d in descriptors {
            let (pre_text, post_text) = descriptor_texts.get(d.path.as_str()).copied().unwrap_or((None, None));
            descriptor_records(d, pre_text, post_text, pre_index, post_index, &mut keyed);
        }
    }
    for change in changes {
        let before = keyed.len();
        if verdict.is_m2m {
            if let Some(post) = change.post_image.as_deref() {
                let side = Side {
                    image: post,
                    path: &change.path,
                    module: post_index.module_of_file(&change.path),
                    relation: Relation::Connected,
                };
                dependency_records(change, &side, change.delta.added_deps.iter().collect(), &mut keyed);
            }
            if let (Some(pre), Some(pre_path)) = (change.pre_image.as_deref(), change.pre_path.as_deref()) {
                let side = Side {
                    image: pre,
                    path: pre_path,
                    module: pre_index.module_of_file(pre_path),
                    relation: Relation::Disconnected,
                };
                dependency_records(change, &side, change.delta.removed_deps.iter().collect(), &mut keyed);
            }
        }
        if keyed.len() == before {
            let path = change.report_path();
            let module = match change.kind {
                ClassChangeKind::Deleted => pre_index.module_of_path(path),
                _ => post_index.module_of_path(path),
            };
            keyed.push((
                path.to_string(),
                SliceRecord {
                    category: 5,
                    source_module: module.map(str::to_string),
                    source_class: file_stem(path).to_string(),
                    member: None,
                    member_context: MemberContext::None,
                    relation: None,
                    target_module: None,
                    target_class: None,
                    ambiguity: false,
                    evidence_lines: Vec::new(),
                    operation: None,
                },
            ));
            non_m2m.push(path.to_string());
        }
    }

    keyed.sort_by(|(pa, a), (pb, b)| {
        (
            a.category,
            pa,
            &a.target_module,
            &a.target_class,
            &a.operation,
            &a.member,
            a.relation,
        )
            .cmp(&(
                b.category,
                pb,
                &b.target_module,
                &b.target_class,
                &b.operation,
                &b.member,
                b.relation,
            ))
    });
    keyed.dedup_by(|(pa, a), (pb, b)| pa == pb && a == b);
    non_m2m.sort();
    non_m2m.dedup();
    SliceDocument {
        commit_id: verdict.commit_id.clone(),
        verdict: verdict.clone(),
        slices: keyed.into_iter().map(|(_, r)| r).collect(),
        non_m2m_classes: non_m2m,
    }
}

impl fmt::Display for SliceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_slice_text(self, &AliasMap::new()))
    }
}
