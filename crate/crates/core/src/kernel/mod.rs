//! Data model shared by every stage: vocabularies, concepts, syntax trees and diagnostics.

pub mod diag;
pub mod expr;
pub mod theory;
pub mod vocabulary;

pub use diag::{Diagnostic, Severity, Span};
pub use expr::{BinOp, Binder, Expr, ExprKind, QuantKind, Range, SigRef, TypeRef};
pub use theory::{Assignment, Definition, Literal, Rule, StructureDecl, TableLit, Theory};
pub use vocabulary::{
    Concept, Introspection, KernelError, Query, Signature, SymbolDecl, SymbolId, TypeDecl, TypeId,
    TypeInterp, Vocabulary,
};

impl Vocabulary {
    /// Resolves a source-level type reference.
    ///
    /// Conceptual subtypes resolve to their interned entry when one exists and are
    /// otherwise reported as absent; [`Vocabulary::resolve_sig`] works without interning.
    pub fn resolve_type(&self, t: &TypeRef) -> Option<TypeId> {
        match t {
            TypeRef::Named(n) => self.type_id(n),
            TypeRef::Subtype(sig) => self.subtype_of(&self.resolve_sig(sig)?),
        }
    }

    pub fn resolve_sig(&self, sig: &SigRef) -> Option<Signature> {
        let args = sig.args.iter().map(|a| self.resolve_type(a)).collect::<Option<Vec<_>>>()?;
        Some(Signature::new(args, self.resolve_type(&sig.out)?))
    }

    /// Inverse of resolution, used by the printer.
    pub fn type_ref(&self, id: TypeId) -> TypeRef {
        match &self.ty(id).interp {
            TypeInterp::ConceptSubtype(sig) if self.ty(id).anonymous => TypeRef::Subtype(self.sig_ref(sig)),
            _ => TypeRef::Named(self.ty(id).name.clone()),
        }
    }

    pub fn sig_ref(&self, sig: &Signature) -> SigRef {
        SigRef {
            args: sig.args.iter().map(|&a| self.type_ref(a)).collect(),
            out: Box::new(self.type_ref(sig.out)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symptoms() -> Vocabulary {
        let mut v = Vocabulary::new("V");
        let patient = v.add_type("Patient", TypeInterp::Open, Span::default()).unwrap();
        let pred = Signature::new(vec![patient], TypeId::BOOL);
        for s in ["hasFever", "coughs", "sneezes", "highRisk"] {
            v.add_symbol(s, pred.clone(), Span::default()).unwrap();
        }
        let sub = v.intern_subtype(pred.clone());
        v.add_symbol("riskFactor", Signature::new(vec![sub], TypeId::BOOL), Span::default()).unwrap();
        v.add_symbol("severity", Signature::new(vec![patient], TypeId::INT), Span::default()).unwrap();
        v.add_symbol("test", pred, Span::default()).unwrap();
        v
    }

    #[test]
    fn concept_domain_filters_by_signature() {
        let v = symptoms();
        let patient = v.type_id("Patient").unwrap();
        let filter = Signature::new(vec![patient], TypeId::BOOL);
        let names: Vec<_> =
            v.concept_domain(Some(&filter)).iter().map(|c| v.symbol(c.symbol).name.clone()).collect();
        assert_eq!(names, ["hasFever", "coughs", "sneezes", "highRisk", "test"]);
        assert_eq!(v.concept_domain(None).len(), 7);
        let nothing = Signature::new(vec![patient, patient, patient], TypeId::INT);
        assert!(v.concept_domain(Some(&nothing)).is_empty());
    }

    #[test]
    fn introspection() {
        let v = symptoms();
        let fever = v.concept(v.symbol_id("hasFever").unwrap());
        assert_eq!(v.introspect(&fever, Query::Arity), Ok(Introspection::Arity(1)));
        assert_eq!(v.introspect(&fever, Query::Output), Ok(Introspection::Type(TypeId::BOOL)));
        assert_eq!(
            v.introspect(&fever, Query::Input(1)),
            Ok(Introspection::Type(v.type_id("Patient").unwrap()))
        );
        assert_eq!(
            v.introspect(&fever, Query::Input(2)),
            Err(KernelError::IndexOutOfRange { index: 2, arity: 1 })
        );
        assert!(v.introspect(&fever, Query::Input(0)).is_err());
    }

    #[test]
    fn subtypes_are_shared() {
        let mut v = symptoms();
        let patient = v.type_id("Patient").unwrap();
        let a = v.intern_subtype(Signature::new(vec![patient], TypeId::BOOL));
        let b = v.intern_subtype(Signature::new(vec![patient], TypeId::BOOL));
        assert_eq!(a, b);
        assert_eq!(v.show_type(a), "Concept[Patient->Bool]");
    }

    #[test]
    fn validation_rejects_bad_declarations() {
        let mut v = Vocabulary::new("V");
        v.add_type("E", TypeInterp::Enum(vec![]), Span::default()).unwrap();
        v.add_type("D", TypeInterp::Enum(vec!["a".into(), "a".into()]), Span::default()).unwrap();
        v.add_symbol("f", Signature::new(vec![TypeId::INT], TypeId::BOOL), Span::default()).unwrap();
        let codes: Vec<_> = v.validate().iter().map(|d| d.code).collect();
        assert!(codes.contains(&"EmptyType"));
        assert!(codes.contains(&"DuplicateConstructor"));
        assert!(codes.contains(&"UnboundedInt"));
        assert!(v.add_symbol("f", Signature::new(vec![], TypeId::BOOL), Span::default()).is_err());
        assert!(v.add_type("Concept", TypeInterp::Open, Span::default()).is_err());
    }
}
